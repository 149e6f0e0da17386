#include "todlab/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "todlab/io_util.hpp"

namespace todlab {

namespace {

constexpr const char* kMagic = "TODLAB-CKPT v1";

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xff);
    return r;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MLPSpec& spec,
                     const ParamVector& params) {
    check_params(spec, params);
    std::string out = kMagic;
    out += '\n';
    for (std::size_t i = 0; i < spec.layer_sizes.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(spec.layer_sizes[i]);
    }
    out += '\n';
    for (double v : params) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        bits = to_little_endian(bits);
        char raw[8];
        std::memcpy(raw, &bits, 8);
        out.append(raw, 8);
    }
    write_file_atomic(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const std::string blob = read_text_file(path);

    std::size_t line_end = blob.find('\n');
    if (line_end == std::string::npos || blob.substr(0, line_end) != kMagic)
        throw format_error(path.string() + ": not a TODLAB-CKPT v1 file");

    const std::size_t sizes_end = blob.find('\n', line_end + 1);
    if (sizes_end == std::string::npos)
        throw format_error(path.string() + ": missing layer-size line");

    Checkpoint ck;
    for (const std::string& tok :
         split(blob.substr(line_end + 1, sizes_end - line_end - 1), ' ')) {
        const long long s = parse_int(tok, path.string() + ": layer sizes");
        if (s < 1) throw format_error(path.string() + ": layer size must be >= 1");
        ck.spec.layer_sizes.push_back(static_cast<int>(s));
    }
    if (ck.spec.layer_sizes.size() < 2)
        throw format_error(path.string() + ": need at least two layer sizes");

    const std::size_t expected = ck.spec.param_count() * 8;
    const std::size_t payload = blob.size() - (sizes_end + 1);
    if (payload != expected)
        throw format_error(path.string() + ": payload is " + std::to_string(payload) +
                           " bytes, expected " + std::to_string(expected));
    ck.params.resize(ck.spec.param_count());
    const char* src = blob.data() + sizes_end + 1;
    for (std::size_t i = 0; i < ck.params.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, src + i * 8, 8);
        bits = to_little_endian(bits);
        std::memcpy(&ck.params[i], &bits, 8);
    }
    return ck;
}

}  // namespace todlab
