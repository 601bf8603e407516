#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hdrv/masks.hpp"
#include "support/synthetic.hpp"

using namespace hdrv;

TEST_CASE("contrast map on constants, ramps, and impulses") {
    Image flat(8, 8, 3, Domain::LdrDisplay, 0.3f);
    for (float v : contrast_map(flat).data) CHECK(v == 0.0f);

    Image ramp(8, 16, 1, Domain::LdrDisplay);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 16; ++x) ramp.at(x, y) = static_cast<float>(x) / 16.0f;
    const Image c = contrast_map(ramp);
    for (int y = 1; y < 7; ++y)
        for (int x = 1; x < 15; ++x) CHECK(c.at(x, y) == doctest::Approx(0.0).epsilon(1e-6));

    Image impulse(9, 9, 1, Domain::LdrDisplay, 0.0f);
    impulse.at(4, 4) = 1.0f;
    const Image ci = contrast_map(impulse);
    CHECK(ci.at(4, 4) == doctest::Approx(4.0));
    CHECK(ci.at(3, 4) == doctest::Approx(1.0));
    CHECK(ci.at(5, 4) == doctest::Approx(1.0));
    CHECK(ci.at(4, 3) == doctest::Approx(1.0));
    CHECK(ci.at(4, 5) == doctest::Approx(1.0));
}

TEST_CASE("wellness peaks at mid-gray and is symmetric") {
    Image gray(2, 2, 3, Domain::LdrDisplay, 0.5f);
    CHECK(wellness_map(gray).at(0, 0) == doctest::Approx(1.0));

    Image black(2, 2, 3, Domain::LdrDisplay, 0.0f);
    CHECK(wellness_map(black).at(0, 0) == doctest::Approx(8.4818e-5).epsilon(1e-3));

    Image white(2, 2, 3, Domain::LdrDisplay, 1.0f);
    CHECK(wellness_map(white).at(0, 0) == doctest::Approx(wellness_map(black).at(0, 0)));

    CHECK_THROWS_AS(wellness_map(gray, 0.0), std::invalid_argument);
}

TEST_CASE("saturation map") {
    Image gray(2, 2, 3, Domain::LdrDisplay, 0.7f);
    for (float v : saturation_map(gray).data) CHECK(v == 0.0f);

    Image red(1, 1, 3, Domain::LdrDisplay, 0.0f);
    red.at(0, 0, 0) = 1.0f;
    CHECK(saturation_map(red).at(0, 0) == doctest::Approx(0.4714045).epsilon(1e-5));

    // homogeneity: scaling channels scales the std
    Image half = red;
    for (float& v : half.data) v *= 0.5f;
    CHECK(saturation_map(half).at(0, 0) == doctest::Approx(0.5 * 0.4714045).epsilon(1e-5));

    Image mono(2, 2, 1, Domain::LdrDisplay, 0.5f);
    CHECK_THROWS_AS(saturation_map(mono), std::invalid_argument);
}

TEST_CASE("adaptive mask composes the three maps in order") {
    const Image img = testsup::make_texture(16, 16, 10);
    const MaskSet m = adaptive_mask(img);
    const Image c = contrast_map(img);
    const Image e = wellness_map(img);
    const Image s = saturation_map(img);
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        CHECK(m.contrast.data[i] == c.data[i]);
        CHECK(m.wellness.data[i] == e.data[i]);
        CHECK(m.saturation.data[i] == s.data[i]);
        CHECK(m.combined.plane(0)[i] == c.data[i]);
        CHECK(m.combined.plane(1)[i] == e.data[i]);
        CHECK(m.combined.plane(2)[i] == s.data[i]);
    }

    Image gray(4, 4, 3, Domain::LdrDisplay, 0.5f);
    const MaskSet g = adaptive_mask(gray);
    for (size_t i = 0; i < gray.pixel_count(); ++i) {
        CHECK(g.contrast.data[i] == 0.0f);
        CHECK(g.wellness.data[i] == doctest::Approx(1.0));
        CHECK(g.saturation.data[i] == 0.0f);
    }
}

TEST_CASE("mask invariances") {
    const Image img = testsup::make_texture(16, 16, 20, 3, 0.1f, 0.6f);
    Image lifted = img;
    for (float& v : lifted.data) v += 0.2f; // still below clip

    const Image c0 = contrast_map(img), c1 = contrast_map(lifted);
    const Image s0 = saturation_map(img), s1 = saturation_map(lifted);
    const Image e0 = wellness_map(img), e1 = wellness_map(lifted);
    bool wellness_changed = false;
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        CHECK(c1.data[i] == doctest::Approx(c0.data[i]).epsilon(1e-4));
        CHECK(s1.data[i] == doctest::Approx(s0.data[i]).epsilon(1e-4));
        if (std::abs(e1.data[i] - e0.data[i]) > 1e-3f) wellness_changed = true;
    }
    CHECK(wellness_changed);

    // all maps non-negative; wellness in (0,1]
    const MaskSet m = adaptive_mask(img);
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        CHECK(m.contrast.data[i] >= 0.0f);
        CHECK(m.saturation.data[i] >= 0.0f);
        CHECK(m.wellness.data[i] > 0.0f);
        CHECK(m.wellness.data[i] <= 1.0f);
    }
}

TEST_CASE("over-exposed flat regions get suppressed wellness") {
    Image hot(4, 4, 3, Domain::LdrDisplay, 0.98f);
    const Image e = wellness_map(hot);
    for (float v : e.data) CHECK(v < 0.06f);
}
