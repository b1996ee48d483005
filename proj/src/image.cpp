#include "gsmap/image.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include <png.h>

namespace gsmap {

uint8_t quantize_u8(double v) {
    if (v <= 0.0) return 0;
    if (v >= 1.0) return 255;
    return static_cast<uint8_t>(std::lround(v * 255.0));
}

ImageD quantize_image(const ImageD& img) {
    ImageD out(img.h, img.w, img.c);
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = quantize_u8(img.data[i]) / 255.0;
    return out;
}

ImageD quantize_f32(const ImageD& img) {
    ImageD out(img.h, img.w, img.c);
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = static_cast<double>(static_cast<float>(img.data[i]));
    return out;
}

namespace {

struct FileCloser {
    void operator()(FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

void write_png_bytes(const std::string& path, const uint8_t* bytes, int h, int w, int c) {
    if (c != 1 && c != 3)
        throw std::runtime_error("write_png: unsupported channel count for " + path);
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("write_png: cannot open " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("write_png: init failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("write_png: init failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("write_png: encode failure for " + path);
    }
    png_init_io(png, fp.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, w, h, 8,
                 c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // Fixed time field keeps output bytes reproducible.
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = const_cast<png_bytep>(bytes + size_t(y) * w * c);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

MaskU8 read_png_impl(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("read_png: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("read_png: init failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("read_png: init failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png: decode failure for " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w = 0, h = 0;
    int bit_depth = 0, color_type = 0;
    png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    int c = png_get_channels(png, info);
    if (c != 1 && c != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png: unsupported channel count in " + path);
    }
    MaskU8 out(int(h), int(w), c);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = out.data.data() + size_t(y) * w * c;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

template <typename T>
void put_u32(std::vector<uint8_t>& buf, T v) {
    uint32_t u = static_cast<uint32_t>(v);
    buf.push_back(u & 0xff);
    buf.push_back((u >> 8) & 0xff);
    buf.push_back((u >> 16) & 0xff);
    buf.push_back((u >> 24) & 0xff);
}

uint32_t get_u32(const uint8_t* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

} // namespace

void write_png(const std::string& path, const MaskU8& img) {
    write_png_bytes(path, img.data.data(), img.h, img.w, img.c);
}

void write_png(const std::string& path, const ImageD& img) {
    std::vector<uint8_t> bytes(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) bytes[i] = quantize_u8(img.data[i]);
    write_png_bytes(path, bytes.data(), img.h, img.w, img.c);
}

MaskU8 read_png_u8(const std::string& path) {
    return read_png_impl(path);
}

ImageD read_png(const std::string& path) {
    MaskU8 raw = read_png_impl(path);
    ImageD out(raw.h, raw.w, raw.c);
    for (size_t i = 0; i < raw.data.size(); ++i) out.data[i] = raw.data[i] / 255.0;
    return out;
}

void write_f32(const std::string& path, const ImageD& img) {
    std::vector<uint8_t> buf;
    buf.reserve(16 + img.data.size() * 4);
    buf.push_back('F'); buf.push_back('3'); buf.push_back('2'); buf.push_back('F');
    put_u32(buf, img.h);
    put_u32(buf, img.w);
    put_u32(buf, img.c);
    for (double v : img.data) {
        float f = static_cast<float>(v);
        uint32_t u;
        std::memcpy(&u, &f, 4);
        put_u32(buf, u);
    }
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("write_f32: cannot open " + path);
    if (std::fwrite(buf.data(), 1, buf.size(), fp.get()) != buf.size())
        throw std::runtime_error("write_f32: short write to " + path);
}

ImageD read_f32(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("read_f32: cannot open " + path);
    std::fseek(fp.get(), 0, SEEK_END);
    long len = std::ftell(fp.get());
    std::fseek(fp.get(), 0, SEEK_SET);
    if (len < 16) throw std::runtime_error("read_f32: truncated file " + path);
    std::vector<uint8_t> buf(static_cast<size_t>(len));
    if (std::fread(buf.data(), 1, buf.size(), fp.get()) != buf.size())
        throw std::runtime_error("read_f32: short read from " + path);
    if (std::memcmp(buf.data(), "F32F", 4) != 0)
        throw std::runtime_error("read_f32: bad magic in " + path);
    uint32_t h = get_u32(buf.data() + 4);
    uint32_t w = get_u32(buf.data() + 8);
    uint32_t c = get_u32(buf.data() + 12);
    size_t need = 16 + size_t(h) * w * c * 4;
    if (buf.size() != need)
        throw std::runtime_error("read_f32: size mismatch in " + path);
    ImageD out(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    for (size_t i = 0; i < out.data.size(); ++i) {
        uint32_t u = get_u32(buf.data() + 16 + i * 4);
        float f;
        std::memcpy(&f, &u, 4);
        out.data[i] = f;
    }
    return out;
}

} // namespace gsmap
