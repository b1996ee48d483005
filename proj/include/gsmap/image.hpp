#pragma once

// Dense row-major image planes plus PNG and raw float file IO.

#include <cstdint>
#include <string>
#include <vector>

namespace gsmap {

template <typename T>
struct Plane {
    int h = 0, w = 0, c = 1;
    std::vector<T> data;

    Plane() = default;
    Plane(int h_, int w_, int c_ = 1, T fill = T(0))
        : h(h_), w(w_), c(c_), data(size_t(h_) * w_ * c_, fill) {}

    bool empty() const { return data.empty(); }
    size_t size() const { return data.size(); }

    T& at(int y, int x, int ch = 0) { return data[(size_t(y) * w + x) * c + ch]; }
    const T& at(int y, int x, int ch = 0) const { return data[(size_t(y) * w + x) * c + ch]; }

    bool same_shape(const Plane& o) const { return h == o.h && w == o.w && c == o.c; }
};

using ImageD = Plane<double>;
using MaskU8 = Plane<uint8_t>;

// 8-bit PNG. Channel counts 1 (gray) and 3 (rgb) are supported.
// Float images are quantized with round(255 * clamp(v, 0, 1)).
void write_png(const std::string& path, const ImageD& img);
void write_png(const std::string& path, const MaskU8& img);
ImageD read_png(const std::string& path);
MaskU8 read_png_u8(const std::string& path);

// Raw float maps: magic "F32F", then u32 h, w, c, then row-major
// little-endian float32 samples.
void write_f32(const std::string& path, const ImageD& img);
ImageD read_f32(const std::string& path);

// Quantization helpers used to keep in-memory data equal to its serialized form.
uint8_t quantize_u8(double v);
ImageD quantize_image(const ImageD& img);   // round trip through 8-bit
ImageD quantize_f32(const ImageD& img);     // round trip through float32

} // namespace gsmap
