#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scatnet/errors.hpp"
#include "scatnet/filters.hpp"
#include "scatnet/image.hpp"
#include "scatnet/scatternet.hpp"

using namespace scatnet;

namespace {

const WaveletFilterSet& filters() {
    static const WaveletFilterSet f = load_builtin_filter_set();
    return f;
}

struct Rand {
    std::mt19937_64 rng;
    explicit Rand(std::uint64_t seed) : rng(seed) {}
    double next() { return (rng() >> 11) * 0x1.0p-53; }
};

ImageRgb random_image(int rows, int cols, std::uint64_t seed) {
    ImageRgb im(rows, cols);
    Rand r(seed);
    for (int c = 0; c < 3; ++c)
        for (double& v : im.channel(c).v) v = r.next();
    return im;
}

ImageRgb constant_image(int rows, int cols, double r, double g, double b) {
    ImageRgb im(rows, cols);
    for (double& v : im.r.v) v = r;
    for (double& v : im.g.v) v = g;
    for (double& v : im.b.v) v = b;
    return im;
}

double rel_l2(const std::vector<double>& got, const std::vector<double>& want) {
    REQUIRE(got.size() == want.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double d = got[i] - want[i];
        num += d * d;
        den += want[i] * want[i];
    }
    return std::sqrt(num / den);
}

// Dense 2-D Gaussian blur + decimation, written as one quadruple loop over
// the full kernel so it shares no code with the separable production path.
ImagePlane dense_smooth_decimate_oracle(const ImagePlane& x, int levels) {
    const double sigma = std::pow(2.0, levels - 1);
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    const int decim = 1 << levels;
    std::vector<double> taps(2 * radius + 1);
    double sum = 0;
    for (int t = -radius; t <= radius; ++t) {
        taps[t + radius] = std::exp(-0.5 * t * t / (sigma * sigma));
        sum += taps[t + radius];
    }
    for (double& v : taps) v /= sum;

    ImagePlane out(x.rows / decim, x.cols / decim);
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) {
            double acc = 0;
            for (int s = -radius; s <= radius; ++s)
                for (int t = -radius; t <= radius; ++t)
                    acc += taps[s + radius] * taps[t + radius] *
                           x.at(reflect_index(i * decim - s, x.rows),
                                reflect_index(j * decim - t, x.cols));
            out.at(i, j) = acc;
        }
    return out;
}

}  // namespace

TEST_CASE("config defaults validate and hash deterministically") {
    ScatterConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.levels == 2);
    CHECK(cfg.log_k.at(1) == doctest::Approx(1.1));
    CHECK(cfg.resolution_factors == std::vector<double>{1.5, 2.0});

    const std::uint64_t h1 = config_hash(cfg);
    const std::uint64_t h2 = config_hash(ScatterConfig{});
    CHECK(h1 == h2);

    ScatterConfig other;
    other.levels = 3;
    CHECK(config_hash(other) != h1);
    CHECK(canonical_config_text(cfg).find("levels") != std::string::npos);
}

TEST_CASE("config text parsing") {
    const char* text =
        "# pipeline setup\n"
        "levels = 3\n"
        "k1 = 1.3\n"
        "k2 = 0.9\n"
        "resolution_factors = 1, 2\n"
        "pixel_scale = 255\n"
        "alignment = area_average\n";
    const ScatterConfig cfg = parse_scatter_config(text, "inline");
    CHECK(cfg.levels == 3);
    CHECK(cfg.log_k.size() == 2);
    CHECK(cfg.log_k.at(1) == doctest::Approx(1.3));
    CHECK(cfg.log_k.at(2) == doctest::Approx(0.9));
    CHECK(cfg.resolution_factors == std::vector<double>{1.0, 2.0});
    CHECK(cfg.pixel_scale == doctest::Approx(255.0));

    // Key order must not affect the canonical form.
    const char* reordered =
        "pixel_scale=255\nk2=0.9\nresolution_factors=1,2\nlevels=3\nk1=1.3\n";
    CHECK(config_hash(parse_scatter_config(reordered, "inline2")) == config_hash(cfg));

    CHECK_THROWS_AS((void)parse_scatter_config("levels = 2\nwibble = 3\n", "t"), ParseError);
    CHECK_THROWS_AS((void)parse_scatter_config("levels = banana\n", "t"), ParseError);
    CHECK_THROWS_AS((void)parse_scatter_config("levels\n", "t"), ParseError);
    CHECK_THROWS_AS((void)parse_scatter_config("alignment = nearest\n", "t"), ParseError);
    // Structurally fine, semantically invalid.
    CHECK_THROWS_AS((void)parse_scatter_config("levels = 1\n", "t"), ParameterError);
    CHECK_THROWS_AS((void)parse_scatter_config("k1 = -2\n", "t"), ParameterError);
    CHECK_THROWS_AS((void)parse_scatter_config("resolution_factors = 0.5\n", "t"),
                    ParameterError);
    CHECK_THROWS_AS((void)parse_scatter_config("pixel_scale = 0\n", "t"), ParameterError);
}

TEST_CASE("channel paths round-trip through their text form") {
    ScatterPath p0;
    p0.m = 0;
    p0.color = 2;
    p0.resolution_factor = 1.5;
    ScatterPath p1;
    p1.m = 1;
    p1.j1 = 2;
    p1.r1 = 4;
    p1.resolution_factor = 2.0;
    ScatterPath p2;
    p2.m = 2;
    p2.j1 = 1;
    p2.r1 = 5;
    p2.j2 = 2;
    p2.r2 = 0;
    p2.resolution_factor = 1.5;
    for (const ScatterPath& p : {p0, p1, p2}) {
        const std::string s = p.to_string();
        CHECK(ScatterPath::parse(s) == p);
    }
    CHECK(p2.to_string().find("m=2") != std::string::npos);
    CHECK_THROWS_AS((void)ScatterPath::parse("m=9 nonsense"), ParseError);
}

TEST_CASE("resampling snaps to transform-compatible sizes") {
    const ImageRgb im = random_image(32, 32, 1);

    const ImageRgb same = resample_image(im, 1.0, 2);
    CHECK(same.rows() == 32);
    CHECK(same.r.v == im.r.v);  // exact identity, not a resampled copy

    const ImageRgb up = resample_image(im, 1.5, 2);
    CHECK(up.rows() == 48);
    CHECK(up.cols() == 48);
    const ImageRgb up2 = resample_image(im, 2.0, 2);
    CHECK(up2.rows() == 64);

    // 18 * 1.0 = 18 is not a multiple of 4; snaps to 20.
    const ImageRgb odd = resample_image(random_image(18, 18, 2), 1.0, 2);
    CHECK(odd.rows() == 20);

    CHECK_THROWS_AS((void)resample_image(im, 0.75, 2), ParameterError);
    CHECK_THROWS_AS((void)resample_image(im, -1.0, 2), ParameterError);
}

TEST_CASE("resampling preserves constants and value range") {
    const ImageRgb im = constant_image(32, 32, 0.2, 0.5, 0.9);
    const ImageRgb up = resample_image(im, 1.5, 2);
    for (double v : up.r.v) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
    for (double v : up.b.v) CHECK(v == doctest::Approx(0.9).epsilon(1e-12));

    // Bilinear interpolation never overshoots the input range.
    const ImageRgb noisy = random_image(32, 32, 9);
    const ImageRgb up2 = resample_image(noisy, 2.0, 2);
    for (int c = 0; c < 3; ++c)
        for (double v : up2.channel(c).v) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
}

TEST_CASE("smoothing matches a dense convolution oracle") {
    ScatterConfig cfg;
    Rand r(44);
    ImagePlane x(32, 32);
    for (double& v : x.v) v = r.next();
    const ImagePlane got = smooth_decimate(x, cfg);
    const ImagePlane want = dense_smooth_decimate_oracle(x, cfg.levels);
    REQUIRE(got.rows == 8);
    REQUIRE(got.cols == 8);
    double worst = 0;
    for (std::size_t i = 0; i < got.v.size(); ++i)
        worst = std::max(worst, std::abs(got.v[i] - want.v[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("smoothing is unit-gain on constants and localizes impulses") {
    ScatterConfig cfg;
    ImagePlane x(32, 32);
    for (double& v : x.v) v = 0.42;
    const ImagePlane c = smooth_decimate(x, cfg);
    for (double v : c.v) CHECK(v == doctest::Approx(0.42).epsilon(1e-12));

    // An interior impulse reproduces the separable kernel exactly.
    ImagePlane imp(32, 32);
    imp.at(13, 14) = 1.0;
    const ImagePlane y = smooth_decimate(imp, cfg);
    const double sigma = 2.0;
    const int radius = 8;
    double sum = 0;
    std::vector<double> taps(2 * radius + 1);
    for (int t = -radius; t <= radius; ++t) {
        taps[t + radius] = std::exp(-0.5 * t * t / (sigma * sigma));
        sum += taps[t + radius];
    }
    for (double& v : taps) v /= sum;
    auto g = [&](int d) { return std::abs(d) <= radius ? taps[d + radius] : 0.0; };
    for (int i = 0; i < y.rows; ++i)
        for (int j = 0; j < y.cols; ++j)
            CHECK(y.at(i, j) == doctest::Approx(g(4 * i - 13) * g(4 * j - 14)).epsilon(1e-12));
}

TEST_CASE("smoothing contracts single-pixel translations") {
    ScatterConfig cfg;
    Rand r(77);
    ImagePlane x(64, 64);
    for (double& v : x.v) v = r.next();
    ImagePlane xs(64, 64);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) xs.at(i, j) = x.at(i, (j + 63) % 64);

    const double pix_change = rel_l2(xs.v, x.v);
    const ImagePlane a = smooth_decimate(x, cfg);
    const ImagePlane b = smooth_decimate(xs, cfg);
    const double smooth_change = rel_l2(b.v, a.v);
    CHECK(smooth_change < 0.25 * pix_change);
}

TEST_CASE("layer0 produces three smoothed color channels") {
    ScatterConfig cfg;
    const ImageRgb im = constant_image(32, 32, 0.1, 0.2, 0.3);
    const auto ch = layer0(im, cfg);
    REQUIRE(ch.size() == 3);
    for (int c = 0; c < 3; ++c) {
        CHECK(ch[c].path.m == 0);
        CHECK(ch[c].path.color == c);
        CHECK(ch[c].plane.rows == 8);
        for (double v : ch[c].plane.v)
            CHECK(v == doctest::Approx(0.1 * (c + 1)).epsilon(1e-12));
    }
}

TEST_CASE("layer1 envelope geometry, ordering, and color fusion") {
    ScatterConfig cfg;
    const ImageRgb im = random_image(32, 32, 5);
    const auto u1 = layer1_envelopes(im, cfg, filters());
    REQUIRE(u1.size() == 12);
    for (int idx = 0; idx < 12; ++idx) {
        const int j = idx / 6 + 1, r = idx % 6;
        CHECK(u1[idx].path.m == 1);
        CHECK(u1[idx].path.j1 == j);
        CHECK(u1[idx].path.r1 == r);
        CHECK(u1[idx].path.color == -1);
        CHECK(u1[idx].plane.rows == (j == 1 ? 16 : 8));
        for (double v : u1[idx].plane.v) CHECK(v >= 0.0);
    }

    // A gray image fuses to sqrt(3) times the single-channel envelope.
    ImageRgb gray(32, 32);
    Rand r(6);
    for (double& v : gray.r.v) v = r.next();
    gray.g = gray.r;
    gray.b = gray.r;
    const auto ug = layer1_envelopes(gray, cfg, filters());

    const DtcwtPyramid p = dtcwt_forward(gray.r, cfg.levels, filters());
    const ImagePlane m = complex_magnitude(p.subbands[0][2]);
    const ImagePlane& fused = ug[2].plane;  // j=1, orientation 2
    double worst = 0;
    for (std::size_t i = 0; i < m.v.size(); ++i)
        worst = std::max(worst, std::abs(fused.v[i] - std::sqrt(3.0) * m.v[i]));
    CHECK(worst < 1e-12);

    // Zero image -> zero envelopes.
    const auto uz = layer1_envelopes(constant_image(32, 32, 0, 0, 0), cfg, filters());
    for (const auto& e : uz)
        for (double v : e.plane.v) CHECK(v == 0.0);
}

TEST_CASE("layer1 envelopes are invariant to color permutation") {
    ScatterConfig cfg;
    ImageRgb im = random_image(32, 32, 8);
    ImageRgb perm(32, 32);
    perm.r = im.b;
    perm.g = im.r;
    perm.b = im.g;
    const auto a = layer1_envelopes(im, cfg, filters());
    const auto b = layer1_envelopes(perm, cfg, filters());
    for (int i = 0; i < 12; ++i) {
        double worst = 0;
        for (std::size_t k = 0; k < a[i].plane.v.size(); ++k)
            worst = std::max(worst, std::abs(a[i].plane.v[k] - b[i].plane.v[k]));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("log stage uses the per-scale offset and skips unconfigured scales") {
    ScatterConfig cfg;  // k1 = 1.1 only
    SubbandEnvelope e;
    e.path.m = 1;
    e.path.j1 = 1;
    e.plane = ImagePlane(2, 2);
    e.plane.v = {0.0, 1.0, 4.0, 0.5};
    const SubbandEnvelope out = parametric_log(e, cfg);
    CHECK(out.plane.v[0] == doctest::Approx(std::log(1.1)).epsilon(1e-15));
    CHECK(out.plane.v[1] == doctest::Approx(std::log(2.1)).epsilon(1e-15));
    CHECK(out.plane.v[2] == doctest::Approx(std::log(5.1)).epsilon(1e-15));
    // ln(1.1) to full precision; pins the offset value itself.
    CHECK(out.plane.v[0] == doctest::Approx(0.09531017980432486).epsilon(1e-14));

    // Monotonic: order of envelope values is preserved.
    CHECK(out.plane.v[3] > out.plane.v[0]);
    CHECK(out.plane.v[3] < out.plane.v[1]);

    // j = 2 has no configured offset: identity.
    e.path.j1 = 2;
    const SubbandEnvelope id = parametric_log(e, cfg);
    CHECK(id.plane.v == e.plane.v);
}

TEST_CASE("layer2 second-stage envelopes") {
    ScatterConfig cfg;
    const ImageRgb im = random_image(32, 32, 12);
    auto u1 = layer1_envelopes(im, cfg, filters());
    std::vector<SubbandEnvelope> scale1(u1.begin(), u1.begin() + 6);
    for (auto& e : scale1) e = parametric_log(e, cfg);

    const auto u2 = layer2_envelopes(scale1, cfg, filters());
    REQUIRE(u2.size() == 36);
    for (int idx = 0; idx < 36; ++idx) {
        const int r1 = idx / 6, r2 = idx % 6;
        CHECK(u2[idx].path.m == 2);
        CHECK(u2[idx].path.j1 == 1);
        CHECK(u2[idx].path.r1 == r1);
        CHECK(u2[idx].path.j2 == 2);
        CHECK(u2[idx].path.r2 == r2);
        CHECK(u2[idx].plane.rows == 8);  // one more octave down from 16
        for (double v : u2[idx].plane.v) CHECK(v >= 0.0);
    }

    // Constant first-layer input (e.g. zero image after log) has no structure
    // for the second stage to find.
    std::vector<SubbandEnvelope> flat = scale1;
    for (auto& e : flat)
        for (double& v : e.plane.v) v = 0.095;
    const auto u2f = layer2_envelopes(flat, cfg, filters());
    for (const auto& e : u2f)
        for (double v : e.plane.v) CHECK(std::abs(v) < 1e-10);

    // Input validation.
    std::vector<SubbandEnvelope> five(scale1.begin(), scale1.begin() + 5);
    CHECK_THROWS_AS((void)layer2_envelopes(five, cfg, filters()), ParameterError);
    std::vector<SubbandEnvelope> bad = scale1;
    bad[3].plane = ImagePlane(8, 8);
    CHECK_THROWS_AS((void)layer2_envelopes(bad, cfg, filters()), ShapeError);
}

TEST_CASE("single-resolution stack: counts, grid, manifest order") {
    ScatterConfig cfg;
    const ImageRgb im = random_image(48, 48, 20);
    const FeatureTensor t = scatter_one_resolution(im, cfg, filters(), 1.5);
    REQUIRE(t.channels == 51);
    REQUIRE(t.height == 12);
    REQUIRE(t.width == 12);
    REQUIRE(t.manifest.size() == 51);
    REQUIRE(t.data.size() == static_cast<std::size_t>(51) * 12 * 12);

    for (int c = 0; c < 3; ++c) {
        CHECK(t.manifest[c].m == 0);
        CHECK(t.manifest[c].color == c);
        CHECK(t.manifest[c].resolution_factor == doctest::Approx(1.5));
    }
    for (int idx = 3; idx < 15; ++idx) {
        CHECK(t.manifest[idx].m == 1);
        CHECK(t.manifest[idx].j1 == (idx - 3) / 6 + 1);
        CHECK(t.manifest[idx].r1 == (idx - 3) % 6);
    }
    for (int idx = 15; idx < 51; ++idx) {
        CHECK(t.manifest[idx].m == 2);
        CHECK(t.manifest[idx].r1 == (idx - 15) / 6);
        CHECK(t.manifest[idx].r2 == (idx - 15) % 6);
        CHECK(t.manifest[idx].j1 == 1);
        CHECK(t.manifest[idx].j2 == 2);
    }

    // Indivisible grid is a shape error; never silently cropped.
    CHECK_THROWS_AS((void)scatter_one_resolution(random_image(30, 30, 1), cfg, filters(), 1.0),
                    ShapeError);
}

TEST_CASE("single-resolution stack of a constant image") {
    ScatterConfig cfg;
    const ImageRgb im = constant_image(32, 32, 0.25, 0.5, 0.75);
    const FeatureTensor t = scatter_one_resolution(im, cfg, filters(), 1.0);
    REQUIRE(t.channels == 51);
    // Layer 0: the colors themselves.
    CHECK(t.at(0, 3, 3) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(t.at(1, 3, 3) == doctest::Approx(0.50).epsilon(1e-12));
    CHECK(t.at(2, 3, 3) == doctest::Approx(0.75).epsilon(1e-12));
    // Layer 1 scale 1 passes through log(0 + 1.1); scale 2 has no offset.
    for (int idx = 3; idx < 9; ++idx)
        CHECK(t.at(idx, 2, 5) == doctest::Approx(std::log(1.1)).epsilon(1e-10));
    for (int idx = 9; idx < 15; ++idx) CHECK(std::abs(t.at(idx, 2, 5)) < 1e-10);
    // Layer 2 sees a constant log envelope: nothing to respond to.
    for (int idx = 15; idx < 51; ++idx) CHECK(std::abs(t.at(idx, 4, 4)) < 1e-9);
}

TEST_CASE("full extraction: 102 channels on the common grid") {
    ScatterConfig cfg;
    const ImageRgb im = random_image(32, 32, 30);
    const FeatureTensor t = extract_features(im, cfg, filters());
    REQUIRE(t.channels == 102);
    REQUIRE(t.height == 12);  // 32*1.5/4 = 12 beats 32*2/4 = 16
    REQUIRE(t.width == 12);
    REQUIRE(t.manifest.size() == 102);
    for (int c = 0; c < 51; ++c)
        CHECK(t.manifest[c].resolution_factor == doctest::Approx(1.5));
    for (int c = 51; c < 102; ++c)
        CHECK(t.manifest[c].resolution_factor == doctest::Approx(2.0));
    // Block layout repeats per resolution.
    CHECK(t.manifest[51].m == 0);
    CHECK(t.manifest[51].color == 0);
    CHECK(t.manifest[54].m == 1);
}

TEST_CASE("pixel_scale multiplies the input") {
    ScatterConfig cfg;
    ScatterConfig scaled = cfg;
    scaled.pixel_scale = 4.0;
    const ImageRgb im = random_image(32, 32, 31);
    const FeatureTensor a = extract_features(im, cfg, filters());
    const FeatureTensor b = extract_features(im, scaled, filters());
    // Layer-0 channels scale linearly.
    CHECK(b.at(0, 5, 5) == doctest::Approx(4.0 * a.at(0, 5, 5)).epsilon(1e-12));
    // Log channels do not (that is the point of the offset).
    CHECK(b.at(3, 5, 5) != doctest::Approx(4.0 * a.at(3, 5, 5)).epsilon(1e-3));
}

TEST_CASE("fused channels ignore color order, layer0 tracks it") {
    ScatterConfig cfg;
    ImageRgb im = random_image(32, 32, 33);
    ImageRgb perm(32, 32);
    perm.r = im.g;
    perm.g = im.b;
    perm.b = im.r;
    const FeatureTensor a = extract_features(im, cfg, filters());
    const FeatureTensor b = extract_features(perm, cfg, filters());
    const std::size_t plane = static_cast<std::size_t>(12) * 12;
    // Channels 3.. of each 51-block are color-fused: identical.
    for (int blk : {0, 51})
        for (int c = blk + 3; c < blk + 51; ++c)
            for (std::size_t i = 0; i < plane; ++i)
                CHECK(a.data[c * plane + i] ==
                      doctest::Approx(b.data[c * plane + i]).epsilon(1e-12));
    // Layer-0 channels permute with the colors: perm's red is im's green.
    for (std::size_t i = 0; i < plane; ++i)
        CHECK(b.data[0 * plane + i] == doctest::Approx(a.data[1 * plane + i]).epsilon(1e-12));
}

TEST_CASE("features change less than pixels under translation") {
    ScatterConfig cfg;
    ImageRgb im(32, 32);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            const double v = std::cos(2.0 * 3.14159265358979323846 * 0.2 *
                                      (j * std::cos(0.5) + i * std::sin(0.5)));
            im.r.at(i, j) = 0.5 + 0.3 * v;
            im.g.at(i, j) = 0.5 + 0.2 * v;
            im.b.at(i, j) = 0.5 - 0.25 * v;
        }
    ImageRgb shifted(32, 32);
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 32; ++i)
            for (int j = 0; j < 32; ++j)
                shifted.channel(c).at(i, j) = im.channel(c).at(i, (j + 31) % 32);

    std::vector<double> pix, pix_s;
    for (int c = 0; c < 3; ++c) {
        pix.insert(pix.end(), im.channel(c).v.begin(), im.channel(c).v.end());
        pix_s.insert(pix_s.end(), shifted.channel(c).v.begin(), shifted.channel(c).v.end());
    }
    const double pixel_change = rel_l2(pix_s, pix);

    const FeatureTensor a = extract_features(im, cfg, filters());
    const FeatureTensor b = extract_features(shifted, cfg, filters());
    const double feature_change = rel_l2(b.data, a.data);
    CHECK(feature_change < 0.5 * pixel_change);
}

TEST_CASE("nearly all channels carry signal on textured input") {
    ScatterConfig cfg;
    const int kImages = 20;
    std::vector<double> mean(102, 0.0), sq(102, 0.0);
    const std::size_t plane = static_cast<std::size_t>(12) * 12;
    for (int n = 0; n < kImages; ++n) {
        const FeatureTensor t = extract_features(random_image(32, 32, 100 + n), cfg, filters());
        for (int c = 0; c < 102; ++c) {
            // summarize each channel by its spatial mean
            double m = 0;
            for (std::size_t i = 0; i < plane; ++i) m += t.data[c * plane + i];
            m /= static_cast<double>(plane);
            mean[c] += m;
            sq[c] += m * m;
        }
    }
    int live = 0;
    for (int c = 0; c < 102; ++c) {
        const double m = mean[c] / kImages;
        const double var = sq[c] / kImages - m * m;
        if (var > 1e-18) ++live;
    }
    CHECK(live >= 97);
}

TEST_CASE("area averaging is exact on integer ratios and conserves mass") {
    ImagePlane x(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) x.at(i, j) = i * 4 + j;
    const ImagePlane h = area_average_resize(x, 2, 2);
    CHECK(h.at(0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
    CHECK(h.at(1, 1) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));

    // Fractional ratio 3 -> 2: cells overlap 1.5 source cells each.
    ImagePlane y(1, 3);
    y.v = {1.0, 2.0, 4.0};
    const ImagePlane f = area_average_resize(y, 1, 2);
    CHECK(f.at(0, 0) == doctest::Approx((1.0 + 0.5 * 2.0) / 1.5));
    CHECK(f.at(0, 1) == doctest::Approx((0.5 * 2.0 + 4.0) / 1.5));

    // Total mass (area-weighted mean) is conserved.
    Rand r(9);
    ImagePlane z(16, 16);
    for (double& v : z.v) v = r.next();
    const ImagePlane w = area_average_resize(z, 12, 12);
    double mz = 0, mw = 0;
    for (double v : z.v) mz += v;
    for (double v : w.v) mw += v;
    CHECK(mw / w.v.size() == doctest::Approx(mz / z.v.size()).epsilon(1e-12));

    CHECK_THROWS_AS((void)area_average_resize(z, 20, 20), ParameterError);
}
