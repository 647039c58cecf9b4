#include "scatnet/dtcwt.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "scatnet/errors.hpp"

namespace scatnet {
namespace {

// Tree a samples odd phase in highpass-filtered dimensions at level 1.
constexpr int kHighpassPhaseA = 1;

ImagePlane transpose(const ImagePlane& x) {
    ImagePlane out(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i) {
        const double* src = x.row(i);
        for (int j = 0; j < x.cols; ++j) out.at(j, i) = src[j];
    }
    return out;
}

// Undecimated centered filter along rows (axis 0), half-sample symmetric
// extension: y(i) = sum_t f(t) x_ext(i + center - t).
ImagePlane colfilter(const ImagePlane& x, const std::vector<double>& f, int center) {
    ImagePlane out(x.rows, x.cols);
    const int taps = static_cast<int>(f.size());
    for (int i = 0; i < x.rows; ++i) {
        double* dst = out.row(i);
        for (int t = 0; t < taps; ++t) {
            const double c = f[t];
            const double* src = x.row(reflect_index(i + center - t, x.rows));
            for (int j = 0; j < x.cols; ++j) dst[j] += c * src[j];
        }
    }
    return out;
}

ImagePlane rowfilter(const ImagePlane& x, const std::vector<double>& f, int center) {
    return transpose(colfilter(transpose(x), f, center));
}

// Dual-tree decimating stage along rows. Input rows must be divisible by 4.
// Even input positions belong to tree a, odd to tree b; likewise the output:
//   out(2k)   = sum_t fa(t) u_ext(4k + T   - 2t)
//   out(2k+1) = sum_t fb(t) u_ext(4k + T+1 - 2t)    (T = tap count, even)
ImagePlane coldfilt(const ImagePlane& u, const std::vector<double>& fa,
                    const std::vector<double>& fb) {
    const int n = u.rows;
    if (n % 4 != 0)
        throw ShapeError("dual-tree stage needs row count divisible by 4, got " +
                         std::to_string(n));
    const int taps = static_cast<int>(fa.size());
    ImagePlane out(n / 2, u.cols);
    for (int k = 0; k < n / 4; ++k) {
        double* da = out.row(2 * k);
        double* db = out.row(2 * k + 1);
        for (int t = 0; t < taps; ++t) {
            const double* sa = u.row(reflect_index(4 * k + taps - 2 * t, n));
            const double* sb = u.row(reflect_index(4 * k + taps + 1 - 2 * t, n));
            const double ca = fa[t];
            const double cb = fb[t];
            for (int j = 0; j < u.cols; ++j) {
                da[j] += ca * sa[j];
                db[j] += cb * sb[j];
            }
        }
    }
    return out;
}

ImagePlane rowdfilt(const ImagePlane& u, const std::vector<double>& fa,
                    const std::vector<double>& fb) {
    return transpose(coldfilt(transpose(u), fa, fb));
}

// Transpose of coldfilt: w (n/2 rows, both trees interleaved) -> u (n rows).
// The interleaved array extends by plain half-sample reflection; because tree
// b's filter is the reverse of tree a's, that reflection is exactly the
// cross-tree borrowing the boundary needs.
ImagePlane coldfilt_inv(const ImagePlane& w, const std::vector<double>& fa,
                        const std::vector<double>& fb) {
    const int half = w.rows;
    const int n = 2 * half;
    const int taps = static_cast<int>(fa.size());
    ImagePlane u(n, w.cols);
    auto wrow = [&](int j) -> const double* { return w.row(reflect_index(j, half)); };
    for (int i = 0; i < n; ++i) {
        double* dst = u.row(i);
        const bool even = (i % 2 == 0);
        const std::vector<double>& f = even ? fa : fb;
        const int offset = even ? taps : taps + 1;
        for (int t = 0; t < taps; ++t) {
            const int num = i - offset + 2 * t;
            if (((num % 4) + 4) % 4 != 0) continue;
            const int k = num / 4;  // exact, so truncation == floor
            const double* src = wrow(even ? 2 * k : 2 * k + 1);
            const double c = f[t];
            for (int j = 0; j < w.cols; ++j) dst[j] += c * src[j];
        }
    }
    return u;
}

ImagePlane rowdfilt_inv(const ImagePlane& w, const std::vector<double>& fa,
                        const std::vector<double>& fb) {
    return transpose(coldfilt_inv(transpose(w), fa, fb));
}

struct TreePlanes {
    ImagePlane aa, ab, ba, bb;
};

// par == 0 puts tree a on the even phase of that dimension.
TreePlanes split_trees(const ImagePlane& band, int par_v, int par_h) {
    const int hr = band.rows / 2;
    const int hc = band.cols / 2;
    const int av = par_v, bv = 1 - par_v;
    const int ah = par_h, bh = 1 - par_h;
    TreePlanes tp{ImagePlane(hr, hc), ImagePlane(hr, hc), ImagePlane(hr, hc),
                  ImagePlane(hr, hc)};
    for (int i = 0; i < hr; ++i) {
        const double* ra = band.row(2 * i + av);
        const double* rb = band.row(2 * i + bv);
        for (int j = 0; j < hc; ++j) {
            tp.aa.at(i, j) = ra[2 * j + ah];
            tp.ab.at(i, j) = ra[2 * j + bh];
            tp.ba.at(i, j) = rb[2 * j + ah];
            tp.bb.at(i, j) = rb[2 * j + bh];
        }
    }
    return tp;
}

ImagePlane merge_trees(const TreePlanes& tp, int par_v, int par_h) {
    const int hr = tp.aa.rows;
    const int hc = tp.aa.cols;
    const int av = par_v, bv = 1 - par_v;
    const int ah = par_h, bh = 1 - par_h;
    ImagePlane out(2 * hr, 2 * hc);
    for (int i = 0; i < hr; ++i) {
        double* ra = out.row(2 * i + av);
        double* rb = out.row(2 * i + bv);
        for (int j = 0; j < hc; ++j) {
            ra[2 * j + ah] = tp.aa.at(i, j);
            ra[2 * j + bh] = tp.ab.at(i, j);
            rb[2 * j + ah] = tp.ba.at(i, j);
            rb[2 * j + bh] = tp.bb.at(i, j);
        }
    }
    return out;
}

// Four real tree planes -> two conjugate-quadrature complex bands.
std::pair<ComplexSubband, ComplexSubband> combine(const TreePlanes& tp) {
    const int hr = tp.aa.rows;
    const int hc = tp.aa.cols;
    ComplexSubband z1, z2;
    z1.real_part = ImagePlane(hr, hc);
    z1.imag_part = ImagePlane(hr, hc);
    z2.real_part = ImagePlane(hr, hc);
    z2.imag_part = ImagePlane(hr, hc);
    for (std::size_t s = 0; s < tp.aa.v.size(); ++s) {
        const double aa = tp.aa.v[s], ab = tp.ab.v[s];
        const double ba = tp.ba.v[s], bb = tp.bb.v[s];
        z1.real_part.v[s] = (aa - bb) * 0.25;
        z1.imag_part.v[s] = (ab + ba) * 0.25;
        z2.real_part.v[s] = (aa + bb) * 0.25;
        z2.imag_part.v[s] = (ba - ab) * 0.25;
    }
    return {std::move(z1), std::move(z2)};
}

TreePlanes uncombine(const ComplexSubband& z1, const ComplexSubband& z2) {
    const int hr = z1.real_part.rows;
    const int hc = z1.real_part.cols;
    TreePlanes tp{ImagePlane(hr, hc), ImagePlane(hr, hc), ImagePlane(hr, hc),
                  ImagePlane(hr, hc)};
    for (std::size_t s = 0; s < tp.aa.v.size(); ++s) {
        const double r1 = z1.real_part.v[s], i1 = z1.imag_part.v[s];
        const double r2 = z2.real_part.v[s], i2 = z2.imag_part.v[s];
        tp.aa.v[s] = 2.0 * (r1 + r2);
        tp.bb.v[s] = 2.0 * (r2 - r1);
        tp.ab.v[s] = 2.0 * (i1 - i2);
        tp.ba.v[s] = 2.0 * (i1 + i2);
    }
    return tp;
}

// Orientation slots per band group. The first slot takes the (aa-bb)-real
// member, the second the (aa+bb)-real member; chosen so indices 0..5 run in
// ascending orientation at every level.
struct GroupSlots {
    int first, second;
};
constexpr GroupSlots kSlotsLH{5, 0};
constexpr GroupSlots kSlotsHH{1, 4};
constexpr GroupSlots kSlotsHL{3, 2};

void emplace_group(std::array<ComplexSubband, 6>& out, const ImagePlane& band,
                   int par_v, int par_h, GroupSlots slots, int level) {
    auto [z1, z2] = combine(split_trees(band, par_v, par_h));
    z1.level = level;
    z1.orientation = slots.first;
    z2.level = level;
    z2.orientation = slots.second;
    out[static_cast<std::size_t>(slots.first)] = std::move(z1);
    out[static_cast<std::size_t>(slots.second)] = std::move(z2);
}

void add_into(ImagePlane& acc, const ImagePlane& x) {
    for (std::size_t s = 0; s < acc.v.size(); ++s) acc.v[s] += x.v[s];
}

} // namespace

DtcwtPyramid dtcwt_forward(const ImagePlane& x, int levels, const WaveletFilterSet& f) {
    if (levels < 1 || levels > 16)
        throw ParameterError("decomposition levels must be in [1,16], got " +
                             std::to_string(levels));
    const int scale = 1 << levels;
    if (x.rows <= 0 || x.cols <= 0 || x.rows % scale != 0 || x.cols % scale != 0)
        throw ShapeError("input " + std::to_string(x.rows) + "x" + std::to_string(x.cols) +
                         " not divisible by 2^levels = " + std::to_string(scale));

    DtcwtPyramid p;
    p.levels = levels;
    p.subbands.resize(static_cast<std::size_t>(levels));

    const int c_lo = static_cast<int>(f.level1_lowpass_a.size()) / 2;
    const int c_hi = static_cast<int>(f.level1_highpass_a.size()) / 2;
    ImagePlane lo_v = colfilter(x, f.level1_lowpass_a, c_lo);
    ImagePlane hi_v = colfilter(x, f.level1_highpass_a, c_hi);
    ImagePlane ll = rowfilter(lo_v, f.level1_lowpass_a, c_lo);
    ImagePlane lh = rowfilter(lo_v, f.level1_highpass_a, c_hi);
    ImagePlane hl = rowfilter(hi_v, f.level1_lowpass_a, c_lo);
    ImagePlane hh = rowfilter(hi_v, f.level1_highpass_a, c_hi);

    emplace_group(p.subbands[0], lh, 0, kHighpassPhaseA, kSlotsLH, 1);
    emplace_group(p.subbands[0], hh, kHighpassPhaseA, kHighpassPhaseA, kSlotsHH, 1);
    emplace_group(p.subbands[0], hl, kHighpassPhaseA, 0, kSlotsHL, 1);

    ImagePlane state = std::move(ll);  // interleaved four-tree lowpass, a = even
    for (int lev = 2; lev <= levels; ++lev) {
        ImagePlane lo_c = coldfilt(state, f.qshift_lowpass_a, f.qshift_lowpass_b);
        ImagePlane hi_c = coldfilt(state, f.qshift_highpass_a, f.qshift_highpass_b);
        ImagePlane ll2 = rowdfilt(lo_c, f.qshift_lowpass_a, f.qshift_lowpass_b);
        ImagePlane lh2 = rowdfilt(lo_c, f.qshift_highpass_a, f.qshift_highpass_b);
        ImagePlane hl2 = rowdfilt(hi_c, f.qshift_lowpass_a, f.qshift_lowpass_b);
        ImagePlane hh2 = rowdfilt(hi_c, f.qshift_highpass_a, f.qshift_highpass_b);
        auto& slot = p.subbands[static_cast<std::size_t>(lev - 1)];
        emplace_group(slot, lh2, 0, 0, kSlotsLH, lev);
        emplace_group(slot, hh2, 0, 0, kSlotsHH, lev);
        emplace_group(slot, hl2, 0, 0, kSlotsHL, lev);
        state = std::move(ll2);
    }

    p.lowpass = ImagePlane(state.rows / 2, state.cols / 2);
    for (int i = 0; i < p.lowpass.rows; ++i)
        for (int j = 0; j < p.lowpass.cols; ++j) p.lowpass.at(i, j) = state.at(2 * i, 2 * j);
    p.lowpass_state = std::move(state);
    return p;
}

ImagePlane dtcwt_inverse(const DtcwtPyramid& p, const WaveletFilterSet& f) {
    if (p.levels < 1 || p.subbands.size() != static_cast<std::size_t>(p.levels))
        throw ShapeError("pyramid holds " + std::to_string(p.subbands.size()) +
                         " subband levels but declares " + std::to_string(p.levels));
    const ImagePlane& st = p.lowpass_state;
    if (st.rows <= 0 || st.cols <= 0 || st.rows % 2 != 0 || st.cols % 2 != 0)
        throw ShapeError("lowpass state has invalid shape " + std::to_string(st.rows) + "x" +
                         std::to_string(st.cols));
    for (int lev = 1; lev <= p.levels; ++lev) {
        // state is at half the level-lev input rate, so band planes at level
        // lev (quarter of that input) must measure state * 2^(levels-lev) / 2.
        const int want_r = (st.rows << (p.levels - lev)) / 2;
        const int want_c = (st.cols << (p.levels - lev)) / 2;
        for (const ComplexSubband& b : p.subbands[static_cast<std::size_t>(lev - 1)]) {
            if (b.real_part.rows != want_r || b.real_part.cols != want_c ||
                !b.real_part.same_shape(b.imag_part))
                throw ShapeError("level " + std::to_string(lev) + " subband shape mismatch");
        }
    }

    ImagePlane state = st;
    for (int lev = p.levels; lev >= 2; --lev) {
        const auto& sb = p.subbands[static_cast<std::size_t>(lev - 1)];
        ImagePlane lh2 = merge_trees(uncombine(sb[5], sb[0]), 0, 0);
        ImagePlane hh2 = merge_trees(uncombine(sb[1], sb[4]), 0, 0);
        ImagePlane hl2 = merge_trees(uncombine(sb[3], sb[2]), 0, 0);
        ImagePlane lo_c = rowdfilt_inv(state, f.qshift_lowpass_a, f.qshift_lowpass_b);
        add_into(lo_c, rowdfilt_inv(lh2, f.qshift_highpass_a, f.qshift_highpass_b));
        ImagePlane hi_c = rowdfilt_inv(hl2, f.qshift_lowpass_a, f.qshift_lowpass_b);
        add_into(hi_c, rowdfilt_inv(hh2, f.qshift_highpass_a, f.qshift_highpass_b));
        state = coldfilt_inv(lo_c, f.qshift_lowpass_a, f.qshift_lowpass_b);
        add_into(state, coldfilt_inv(hi_c, f.qshift_highpass_a, f.qshift_highpass_b));
    }

    const auto& sb = p.subbands[0];
    ImagePlane lh = merge_trees(uncombine(sb[5], sb[0]), 0, kHighpassPhaseA);
    ImagePlane hh = merge_trees(uncombine(sb[1], sb[4]), kHighpassPhaseA, kHighpassPhaseA);
    ImagePlane hl = merge_trees(uncombine(sb[3], sb[2]), kHighpassPhaseA, 0);

    const int c_lo = static_cast<int>(f.synthesis_level1_lowpass_a.size()) / 2;
    const int c_hi = static_cast<int>(f.synthesis_level1_highpass_a.size()) / 2;
    ImagePlane lo_v = rowfilter(state, f.synthesis_level1_lowpass_a, c_lo);
    add_into(lo_v, rowfilter(lh, f.synthesis_level1_highpass_a, c_hi));
    ImagePlane hi_v = rowfilter(hl, f.synthesis_level1_lowpass_a, c_lo);
    add_into(hi_v, rowfilter(hh, f.synthesis_level1_highpass_a, c_hi));
    ImagePlane xa = colfilter(lo_v, f.synthesis_level1_lowpass_a, c_lo);
    ImagePlane xb = colfilter(hi_v, f.synthesis_level1_highpass_a, c_hi);
    ImagePlane x(xa.rows, xa.cols);
    for (std::size_t s = 0; s < x.v.size(); ++s) x.v[s] = 0.25 * (xa.v[s] + xb.v[s]);
    return x;
}

ImagePlane complex_magnitude(const ComplexSubband& band) {
    ImagePlane out(band.real_part.rows, band.real_part.cols);
    for (std::size_t s = 0; s < out.v.size(); ++s)
        out.v[s] = std::hypot(band.real_part.v[s], band.imag_part.v[s]);
    return out;
}

// ---------------------------------------------------------------------------
// Direct reference path. Each tree chain collapses to one 1-D kernel per
// dimension (stage filters upsampled by the running rate and convolved), so a
// subband sample is a plain separable correlation against the extended input.
// Nothing below shares code with the cascade above on purpose.

namespace {

struct EquivKernel {
    std::vector<double> k;
    int base = 0;  // y(p) = sum_u k(u) x_ext(rate*p + base - u)
};

std::vector<double> convolve_full(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> upsample(const std::vector<double>& f, int rate) {
    std::vector<double> out((f.size() - 1) * static_cast<std::size_t>(rate) + 1, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) out[i * static_cast<std::size_t>(rate)] = f[i];
    return out;
}

EquivKernel equiv_kernel_1d(const WaveletFilterSet& f, int level, bool high_dim, bool tree_a) {
    EquivKernel ek;
    if (level == 1) {
        if (high_dim) {
            ek.k = f.level1_highpass_a;
            ek.base = static_cast<int>(ek.k.size()) / 2 + (tree_a ? kHighpassPhaseA
                                                                  : 1 - kHighpassPhaseA);
        } else {
            ek.k = f.level1_lowpass_a;
            ek.base = static_cast<int>(ek.k.size()) / 2 + (tree_a ? 0 : 1);
        }
        return ek;
    }
    ek.k = f.level1_lowpass_a;
    ek.base = static_cast<int>(ek.k.size()) / 2 + (tree_a ? 0 : 1);
    int rate = 2;
    for (int lev = 2; lev <= level; ++lev) {
        const bool last_high = high_dim && lev == level;
        const std::vector<double>& stage =
            last_high ? (tree_a ? f.qshift_highpass_a : f.qshift_highpass_b)
                      : (tree_a ? f.qshift_lowpass_a : f.qshift_lowpass_b);
        ek.k = convolve_full(ek.k, upsample(stage, rate));
        ek.base += rate * static_cast<int>(stage.size()) / 2;
        rate *= 2;
    }
    return ek;
}

// Correlate rows of x against ek at stride `rate`, reflecting out-of-range
// row indices; output has out_rows rows and x.cols columns.
ImagePlane apply_rows(const ImagePlane& x, const EquivKernel& ek, int rate, int out_rows) {
    ImagePlane out(out_rows, x.cols);
    const int taps = static_cast<int>(ek.k.size());
    for (int p = 0; p < out_rows; ++p) {
        double* dst = out.row(p);
        for (int u = 0; u < taps; ++u) {
            const double c = ek.k[static_cast<std::size_t>(u)];
            if (c == 0.0) continue;
            const double* src = x.row(reflect_index(rate * p + ek.base - u, x.rows));
            for (int j = 0; j < x.cols; ++j) dst[j] += c * src[j];
        }
    }
    return out;
}

ImagePlane apply_cols(const ImagePlane& x, const EquivKernel& ek, int rate, int out_cols) {
    ImagePlane out(x.rows, out_cols);
    const int taps = static_cast<int>(ek.k.size());
    for (int i = 0; i < x.rows; ++i) {
        const double* src = x.row(i);
        double* dst = out.row(i);
        for (int q = 0; q < out_cols; ++q) {
            double acc = 0.0;
            for (int u = 0; u < taps; ++u)
                acc += ek.k[static_cast<std::size_t>(u)] *
                       src[reflect_index(rate * q + ek.base - u, x.cols)];
            dst[q] = acc;
        }
    }
    return out;
}

} // namespace

ComplexSubband oracle_direct_subband(const ImagePlane& x, int level, int orientation,
                                     const WaveletFilterSet& f) {
    if (x.rows > 64 || x.cols > 64)
        throw ParameterError("direct reference path limited to 64x64 inputs, got " +
                             std::to_string(x.rows) + "x" + std::to_string(x.cols));
    if (level < 1 || orientation < 0 || orientation > 5)
        throw ParameterError("bad level/orientation for direct reference path");
    const int rate = 1 << level;
    if (x.rows % rate != 0 || x.cols % rate != 0)
        throw ShapeError("input not divisible by 2^level");

    bool v_high = false, h_high = false, first_slot = false;
    switch (orientation) {
        case 5: v_high = false; h_high = true;  first_slot = true;  break;  // LH z1
        case 0: v_high = false; h_high = true;  first_slot = false; break;  // LH z2
        case 1: v_high = true;  h_high = true;  first_slot = true;  break;  // HH z1
        case 4: v_high = true;  h_high = true;  first_slot = false; break;  // HH z2
        case 3: v_high = true;  h_high = false; first_slot = true;  break;  // HL z1
        case 2: v_high = true;  h_high = false; first_slot = false; break;  // HL z2
    }

    const int out_r = x.rows / rate;
    const int out_c = x.cols / rate;
    const EquivKernel kva = equiv_kernel_1d(f, level, v_high, true);
    const EquivKernel kvb = equiv_kernel_1d(f, level, v_high, false);
    const EquivKernel kha = equiv_kernel_1d(f, level, h_high, true);
    const EquivKernel khb = equiv_kernel_1d(f, level, h_high, false);

    const ImagePlane rows_a = apply_rows(x, kva, rate, out_r);
    const ImagePlane rows_b = apply_rows(x, kvb, rate, out_r);
    const ImagePlane paa = apply_cols(rows_a, kha, rate, out_c);
    const ImagePlane pab = apply_cols(rows_a, khb, rate, out_c);
    const ImagePlane pba = apply_cols(rows_b, kha, rate, out_c);
    const ImagePlane pbb = apply_cols(rows_b, khb, rate, out_c);

    ComplexSubband z;
    z.level = level;
    z.orientation = orientation;
    z.real_part = ImagePlane(out_r, out_c);
    z.imag_part = ImagePlane(out_r, out_c);
    for (std::size_t s = 0; s < z.real_part.v.size(); ++s) {
        const double aa = paa.v[s], ab = pab.v[s], ba = pba.v[s], bb = pbb.v[s];
        if (first_slot) {
            z.real_part.v[s] = (aa - bb) * 0.25;
            z.imag_part.v[s] = (ab + ba) * 0.25;
        } else {
            z.real_part.v[s] = (aa + bb) * 0.25;
            z.imag_part.v[s] = (ba - ab) * 0.25;
        }
    }
    return z;
}

} // namespace scatnet
