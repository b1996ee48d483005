#include "gsmap/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "gsmap/types.hpp"

namespace gsmap {

namespace {

// 3x5 glyphs, rows top to bottom, 3 bits each (msb = left column).
struct Glyph {
    char ch;
    uint8_t rows[5];
};

const Glyph kFont[] = {
    {'0', {0b111, 0b101, 0b101, 0b101, 0b111}},
    {'1', {0b010, 0b110, 0b010, 0b010, 0b111}},
    {'2', {0b111, 0b001, 0b111, 0b100, 0b111}},
    {'3', {0b111, 0b001, 0b111, 0b001, 0b111}},
    {'4', {0b101, 0b101, 0b111, 0b001, 0b001}},
    {'5', {0b111, 0b100, 0b111, 0b001, 0b111}},
    {'6', {0b111, 0b100, 0b111, 0b101, 0b111}},
    {'7', {0b111, 0b001, 0b001, 0b010, 0b010}},
    {'8', {0b111, 0b101, 0b111, 0b101, 0b111}},
    {'9', {0b111, 0b101, 0b111, 0b001, 0b111}},
    {'.', {0b000, 0b000, 0b000, 0b000, 0b010}},
    {'-', {0b000, 0b000, 0b111, 0b000, 0b000}},
    {'+', {0b000, 0b010, 0b111, 0b010, 0b000}},
    {'e', {0b111, 0b100, 0b110, 0b100, 0b111}},
};

const Glyph* find_glyph(char c) {
    for (const Glyph& g : kFont)
        if (g.ch == c) return &g;
    return nullptr;
}

void set_px(ImageD& img, int y, int x, const Vec3& color) {
    if (y < 0 || y >= img.h || x < 0 || x >= img.w) return;
    for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = color[ch];
}

void draw_line(ImageD& img, int y0, int x0, int y1, int x1, const Vec3& color) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        set_px(img, y0, x0, color);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) { err += dy; x0 += sx; }
        if (e2 <= dx) { err += dx; y0 += sy; }
    }
}

// 2x scale, 2px gap between glyphs; returns text width in pixels.
int draw_text(ImageD& img, int y, int x, const std::string& text, const Vec3& color) {
    const int scale = 2;
    int cx = x;
    for (char c : text) {
        const Glyph* g = find_glyph(c);
        if (g) {
            for (int ry = 0; ry < 5; ++ry)
                for (int rx = 0; rx < 3; ++rx)
                    if (g->rows[ry] & (0b100 >> rx))
                        for (int sy = 0; sy < scale; ++sy)
                            for (int sx = 0; sx < scale; ++sx)
                                set_px(img, y + ry * scale + sy, cx + rx * scale + sx, color);
        }
        cx += 3 * scale + scale;
    }
    return cx - x;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

} // namespace

void plot_curve(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& png_path, int width, int height) {
    if (xs.size() != ys.size()) throw std::runtime_error("plot_curve: xs/ys size mismatch");
    if (xs.empty()) throw std::runtime_error("plot_curve: nothing to plot");
    if (width < 120 || height < 80) throw std::runtime_error("plot_curve: canvas too small");
    for (size_t i = 0; i < xs.size(); ++i)
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            throw std::runtime_error("plot_curve: non-finite data");

    ImageD img(height, width, 3, 1.0);
    const Vec3 axis_c(0.15, 0.15, 0.15);
    const Vec3 grid_c(0.85, 0.85, 0.88);
    const Vec3 line_c(0.12, 0.25, 0.72);

    const int ml = 64, mr = 16, mt = 16, mb = 36;
    const int px0 = ml, px1 = width - mr, py0 = mt, py1 = height - mb;

    double xmin = *std::min_element(xs.begin(), xs.end());
    double xmax = *std::max_element(xs.begin(), xs.end());
    double ymin = *std::min_element(ys.begin(), ys.end());
    double ymax = *std::max_element(ys.begin(), ys.end());
    if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
    if (ymax == ymin) { ymin -= 0.5; ymax += 0.5; }

    auto map_x = [&](double v) {
        return px0 + int(std::lround((v - xmin) / (xmax - xmin) * (px1 - px0)));
    };
    auto map_y = [&](double v) {
        return py1 - int(std::lround((v - ymin) / (ymax - ymin) * (py1 - py0)));
    };

    const int ticks = 4;
    for (int t = 0; t <= ticks; ++t) {
        const double fx = xmin + (xmax - xmin) * t / ticks;
        const double fy = ymin + (ymax - ymin) * t / ticks;
        const int gx = map_x(fx), gy = map_y(fy);
        draw_line(img, py0, gx, py1, gx, grid_c);
        draw_line(img, gy, px0, gy, px1, grid_c);
        draw_line(img, py1, gx, py1 + 4, gx, axis_c);
        draw_line(img, gy, px0 - 4, gy, px0, axis_c);
        const std::string lx = tick_label(fx);
        const std::string ly = tick_label(fy);
        draw_text(img, py1 + 8, gx - int(lx.size()) * 4, lx, axis_c);
        draw_text(img, gy - 5, px0 - 8 - int(ly.size()) * 8, ly, axis_c);
    }
    draw_line(img, py1, px0, py1, px1, axis_c);
    draw_line(img, py0, px0, py1, px0, axis_c);

    for (size_t i = 0; i + 1 < xs.size(); ++i)
        draw_line(img, map_y(ys[i]), map_x(xs[i]), map_y(ys[i + 1]), map_x(xs[i + 1]), line_c);
    for (size_t i = 0; i < xs.size(); ++i) {
        const int cy = map_y(ys[i]), cx = map_x(xs[i]);
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx)
                if (dy * dy + dx * dx <= 4) set_px(img, cy + dy, cx + dx, line_c);
    }

    write_png(png_path, img);
}

} // namespace gsmap
