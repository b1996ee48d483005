#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "gsmap/image.hpp"
#include "gsmap/rng.hpp"
#include "test_util.hpp"

using namespace gsmap;

TEST_CASE("plane indexing is row major, channel fastest") {
    ImageD img(2, 3, 2);
    img.at(1, 2, 1) = 7.0;
    CHECK(img.data[(1 * 3 + 2) * 2 + 1] == 7.0);
    CHECK(img.size() == 12);
    CHECK(ImageD(2, 2, 1, 0.5).data[3] == 0.5);
}

TEST_CASE("quantize_u8 rounds and clamps") {
    CHECK(quantize_u8(0.0) == 0);
    CHECK(quantize_u8(1.0) == 255);
    CHECK(quantize_u8(-3.0) == 0);
    CHECK(quantize_u8(2.0) == 255);
    CHECK(quantize_u8(0.5) == 128);             // round(127.5)
    CHECK(quantize_u8(1.0 / 255.0) == 1);
}

TEST_CASE("quantized images are fixed points of quantization") {
    Rng rng(11);
    ImageD img(5, 7, 3);
    for (double& v : img.data) v = rng.uniform(-0.2, 1.2);
    const ImageD q = quantize_image(img);
    const ImageD qq = quantize_image(q);
    CHECK(q.data == qq.data);
    for (double v : q.data) CHECK(v == double(quantize_u8(v)) / 255.0);
}

TEST_CASE("png round trip preserves quantized rgb and gray images") {
    const std::string dir = gsmap_test::scratch_dir("ut_image");
    Rng rng(3);

    ImageD rgb(9, 13, 3);
    for (double& v : rgb.data) v = rng.uniform();
    const ImageD q = quantize_image(rgb);
    write_png(dir + "/rgb.png", q);
    const ImageD back = read_png(dir + "/rgb.png");
    REQUIRE(back.same_shape(q));
    CHECK(back.data == q.data);

    MaskU8 mask(6, 4, 1);
    for (auto& v : mask.data) v = uint8_t(rng.index(2) * 255);
    write_png(dir + "/mask.png", mask);
    const MaskU8 mback = read_png_u8(dir + "/mask.png");
    REQUIRE(mback.same_shape(mask));
    CHECK(mback.data == mask.data);
}

TEST_CASE("f32 round trip is exact at float32 precision") {
    const std::string dir = gsmap_test::scratch_dir("ut_image_f32");
    Rng rng(5);
    ImageD img(4, 6, 2);
    for (double& v : img.data) v = rng.normal(0.0, 10.0);
    write_f32(dir + "/x.f32", img);
    const ImageD back = read_f32(dir + "/x.f32");
    REQUIRE(back.same_shape(img));
    CHECK(back.data == quantize_f32(img).data);
    for (size_t i = 0; i < img.data.size(); ++i)
        CHECK(back.data[i] == double(float(img.data[i])));
}

TEST_CASE("read_f32 rejects bad files") {
    const std::string dir = gsmap_test::scratch_dir("ut_image_bad");
    {
        std::ofstream out(dir + "/bad.f32", std::ios::binary);
        out << "NOPE" << std::string(12, '\0');
    }
    CHECK_THROWS_WITH_AS(read_f32(dir + "/bad.f32"), doctest::Contains("bad magic"),
                         std::runtime_error);
    CHECK_THROWS_AS(read_f32(dir + "/absent.f32"), std::runtime_error);
}
