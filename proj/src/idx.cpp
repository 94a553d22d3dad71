#include "dgdmn/idx.hpp"

#include "dgdmn/errors.hpp"

#include <cstdint>
#include <fstream>
#include <limits>

namespace dgdmn {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803u;
constexpr std::uint32_t kLabelMagic = 0x00000801u;

std::uint32_t read_u32_be(std::ifstream& f, const std::string& path) {
    unsigned char b[4];
    if (!f.read(reinterpret_cast<char*>(b), 4))
        throw IdxError(path + ": truncated header");
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

std::vector<unsigned char> read_payload(std::ifstream& f, std::size_t count,
                                        const std::string& path) {
    std::vector<unsigned char> bytes(count);
    if (!f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count)))
        throw IdxError(path + ": truncated payload, expected " + std::to_string(count) +
                       " bytes");
    return bytes;
}

std::ifstream open_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IdxError(path + ": cannot open file");
    return f;
}

} // namespace

Tensor load_idx_images(const std::string& path) {
    std::ifstream f = open_file(path);
    const std::uint32_t magic = read_u32_be(f, path);
    if (magic != kImageMagic)
        throw IdxError(path + ": wrong magic 0x" + std::to_string(magic) +
                       ", expected image file (0x803)");
    const std::uint64_t n = read_u32_be(f, path);
    const std::uint64_t rows = read_u32_be(f, path);
    const std::uint64_t cols = read_u32_be(f, path);
    const std::uint64_t total = n * rows * cols;
    if (rows == 0 || cols == 0 || total > (1ull << 33))
        throw IdxError(path + ": dimension overflow (" + std::to_string(n) + " x " +
                       std::to_string(rows) + " x " + std::to_string(cols) + ")");
    const auto bytes = read_payload(f, static_cast<std::size_t>(total), path);
    Tensor out({static_cast<std::size_t>(n), static_cast<std::size_t>(rows),
                static_cast<std::size_t>(cols)});
    for (std::size_t i = 0; i < bytes.size(); ++i)
        out[i] = static_cast<double>(bytes[i]) / 255.0;
    return out;
}

std::vector<std::size_t> load_idx_labels(const std::string& path) {
    std::ifstream f = open_file(path);
    const std::uint32_t magic = read_u32_be(f, path);
    if (magic != kLabelMagic)
        throw IdxError(path + ": wrong magic 0x" + std::to_string(magic) +
                       ", expected label file (0x801)");
    const std::uint64_t n = read_u32_be(f, path);
    if (n > (1ull << 32)) throw IdxError(path + ": dimension overflow");
    const auto bytes = read_payload(f, static_cast<std::size_t>(n), path);
    std::vector<std::size_t> labels(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) labels[i] = bytes[i];
    return labels;
}

} // namespace dgdmn
