#include "ctsev/image_io.hpp"

#include <zlib.h>

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace ctsev {

namespace {

constexpr unsigned char kPngSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open file: " + path.string());
    f.seekg(0, std::ios::end);
    const auto size = f.tellg();
    f.seekg(0, std::ios::beg);
    std::vector<unsigned char> buf(static_cast<std::size_t>(size));
    if (size > 0) f.read(reinterpret_cast<char*>(buf.data()), size);
    if (!f) throw DataError("cannot read file: " + path.string());
    return buf;
}

void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& buf) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open file for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    if (!f) throw DataError("cannot write file: " + path.string());
}

std::uint32_t read_be32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void append_be32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

void append_chunk(std::vector<unsigned char>& out, const char type[4],
                  const std::vector<unsigned char>& data) {
    append_be32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = crc32(crc32(0L, Z_NULL, 0), out.data() + crc_start,
                            static_cast<uInt>(out.size() - crc_start));
    append_be32(out, static_cast<std::uint32_t>(crc));
}

std::vector<unsigned char> zlib_deflate(const std::vector<unsigned char>& raw) {
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> out(bound);
    if (compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw InternalError("zlib compression failed");
    out.resize(bound);
    return out;
}

std::vector<unsigned char> zlib_inflate(const std::vector<unsigned char>& compressed,
                                        std::size_t expected_size, const std::string& context) {
    std::vector<unsigned char> out(expected_size);
    uLongf out_size = static_cast<uLongf>(expected_size);
    const int rc = uncompress(out.data(), &out_size, compressed.data(),
                              static_cast<uLong>(compressed.size()));
    if (rc != Z_OK || out_size != expected_size)
        throw DataError("corrupt compressed data in " + context);
    return out;
}

int paeth_predict(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a);
    const int pb = std::abs(p - b);
    const int pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

GrayImage decode_png(const std::vector<unsigned char>& file, const std::string& name) {
    if (file.size() < 8 || std::memcmp(file.data(), kPngSignature, 8) != 0)
        throw DataError("not a PNG file: " + name);

    std::size_t pos = 8;
    std::uint32_t width = 0, height = 0;
    bool have_header = false;
    std::vector<unsigned char> idat;
    while (pos + 12 <= file.size()) {
        const std::uint32_t length = read_be32(&file[pos]);
        if (pos + 12 + length > file.size())
            throw DataError("truncated PNG chunk in " + name);
        const char* type = reinterpret_cast<const char*>(&file[pos + 4]);
        const unsigned char* data = &file[pos + 8];
        const uLong crc = crc32(crc32(0L, Z_NULL, 0), &file[pos + 4], 4 + length);
        if (static_cast<std::uint32_t>(crc) != read_be32(&file[pos + 8 + length]))
            throw DataError("PNG chunk CRC mismatch in " + name);

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (length != 13) throw DataError("bad IHDR in " + name);
            width = read_be32(data);
            height = read_be32(data + 4);
            const int bit_depth = data[8];
            const int color_type = data[9];
            const int interlace = data[12];
            if (bit_depth != 8 || color_type != 0)
                throw DataError("unsupported PNG (need 8-bit grayscale): " + name);
            if (interlace != 0)
                throw DataError("interlaced PNG not supported: " + name);
            have_header = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + length);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + length;
    }
    if (!have_header || width == 0 || height == 0 || idat.empty())
        throw DataError("incomplete PNG: " + name);

    const std::size_t stride = width;
    const std::size_t raw_size = (stride + 1) * height;
    const std::vector<unsigned char> raw = zlib_inflate(idat, raw_size, name);

    std::vector<unsigned char> pixels(stride * height);
    for (std::size_t y = 0; y < height; ++y) {
        const unsigned char filter = raw[y * (stride + 1)];
        const unsigned char* src = &raw[y * (stride + 1) + 1];
        unsigned char* dst = &pixels[y * stride];
        const unsigned char* prev = y > 0 ? &pixels[(y - 1) * stride] : nullptr;
        for (std::size_t x = 0; x < stride; ++x) {
            const int a = x > 0 ? dst[x - 1] : 0;
            const int b = prev ? prev[x] : 0;
            const int c = (x > 0 && prev) ? prev[x - 1] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth_predict(a, b, c); break;
                default: throw DataError("bad PNG filter type in " + name);
            }
            dst[x] = static_cast<unsigned char>(v & 0xff);
        }
    }

    GrayImage img(static_cast<int>(width), static_cast<int>(height));
    for (std::size_t i = 0; i < pixels.size(); ++i)
        img[i] = static_cast<double>(pixels[i]) / 255.0;
    return img;
}

GrayImage decode_pgm(const std::vector<unsigned char>& file, const std::string& name) {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < file.size()) {
            if (std::isspace(file[pos])) {
                ++pos;
            } else if (file[pos] == '#') {
                while (pos < file.size() && file[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    };
    auto read_token = [&]() -> std::string {
        skip_space();
        std::string tok;
        while (pos < file.size() && !std::isspace(file[pos])) tok += static_cast<char>(file[pos++]);
        return tok;
    };

    if (read_token() != "P5") throw DataError("not a PGM (P5) file: " + name);
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(read_token());
        height = std::stoi(read_token());
        maxval = std::stoi(read_token());
    } catch (const std::exception&) {
        throw DataError("bad PGM header in " + name);
    }
    if (width < 1 || height < 1) throw DataError("bad PGM dimensions in " + name);
    if (maxval <= 0 || maxval > 255)
        throw DataError("unsupported PGM maxval (need <= 255): " + name);
    ++pos; // single whitespace byte after maxval
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (pos + n > file.size()) throw DataError("truncated PGM data in " + name);

    GrayImage img(width, height);
    for (std::size_t i = 0; i < n; ++i)
        img[i] = static_cast<double>(file[pos + i]) / static_cast<double>(maxval);
    return img;
}

unsigned char to_byte(double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

} // namespace

GrayImage load_gray_image(const std::filesystem::path& path) {
    const auto file = read_file(path);
    const std::string ext = path.extension().string();
    if (ext == ".pgm" || ext == ".PGM") return decode_pgm(file, path.string());
    if (ext == ".png" || ext == ".PNG") return decode_png(file, path.string());
    // No recognized extension; sniff the signature.
    if (file.size() >= 8 && std::memcmp(file.data(), kPngSignature, 8) == 0)
        return decode_png(file, path.string());
    if (file.size() >= 2 && file[0] == 'P' && file[1] == '5') return decode_pgm(file, path.string());
    throw DataError("unsupported image format: " + path.string());
}

void save_gray_png(const GrayImage& img, const std::filesystem::path& path) {
    const std::size_t stride = static_cast<std::size_t>(img.width());
    std::vector<unsigned char> raw((stride + 1) * img.height());
    for (int y = 0; y < img.height(); ++y) {
        raw[static_cast<std::size_t>(y) * (stride + 1)] = 0; // filter: none
        for (int x = 0; x < img.width(); ++x)
            raw[static_cast<std::size_t>(y) * (stride + 1) + 1 + x] = to_byte(img.at(x, y));
    }

    std::vector<unsigned char> out(kPngSignature, kPngSignature + 8);
    std::vector<unsigned char> ihdr;
    append_be32(ihdr, static_cast<std::uint32_t>(img.width()));
    append_be32(ihdr, static_cast<std::uint32_t>(img.height()));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(0); // color type: grayscale
    ihdr.push_back(0); // compression
    ihdr.push_back(0); // filter
    ihdr.push_back(0); // interlace
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", zlib_deflate(raw));
    append_chunk(out, "IEND", {});
    write_file(path, out);
}

void save_gray_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::vector<unsigned char> out;
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    out.insert(out.end(), header.begin(), header.end());
    for (double v : img.data()) out.push_back(to_byte(v));
    write_file(path, out);
}

BinaryMask load_mask(const std::filesystem::path& path) {
    const GrayImage img = load_gray_image(path);
    BinaryMask mask(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) mask.set(i, img[i] > 0.0);
    return mask;
}

void save_mask_png(const BinaryMask& mask, const std::filesystem::path& path) {
    GrayImage img(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) img[i] = mask.get(i) ? 1.0 : 0.0;
    save_gray_png(img, path);
}

} // namespace ctsev
