#include "scatnet/scatternet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "scatnet/errors.hpp"
#include "scatnet/util.hpp"

namespace scatnet {
namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- smoothing -------------------------------------------------------------

std::vector<double> gaussian_taps(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
    std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        const double v = std::exp(-0.5 * t * t / (sigma * sigma));
        w[static_cast<std::size_t>(t + radius)] = v;
        sum += v;
    }
    for (double& v : w) v /= sum;  // unit DC gain
    return w;
}

// Symmetric smoothing along rows fused with decimation by `decim` (phase 0),
// half-sample symmetric extension.
ImagePlane smooth_rows_decim(const ImagePlane& x, const std::vector<double>& w, int decim) {
    const int radius = (static_cast<int>(w.size()) - 1) / 2;
    ImagePlane out(x.rows / decim, x.cols);
    for (int p = 0; p < out.rows; ++p) {
        double* dst = out.row(p);
        for (int u = -radius; u <= radius; ++u) {
            const double c = w[static_cast<std::size_t>(u + radius)];
            const double* src = x.row(reflect_index(decim * p + u, x.rows));
            for (int j = 0; j < x.cols; ++j) dst[j] += c * src[j];
        }
    }
    return out;
}

ImagePlane smooth_cols_decim(const ImagePlane& x, const std::vector<double>& w, int decim) {
    const int radius = (static_cast<int>(w.size()) - 1) / 2;
    ImagePlane out(x.rows, x.cols / decim);
    for (int i = 0; i < x.rows; ++i) {
        const double* src = x.row(i);
        double* dst = out.row(i);
        for (int q = 0; q < out.cols; ++q) {
            double acc = 0.0;
            for (int u = -radius; u <= radius; ++u)
                acc += w[static_cast<std::size_t>(u + radius)] *
                       src[reflect_index(decim * q + u, x.cols)];
            dst[q] = acc;
        }
    }
    return out;
}

// The smoothing window is defined in input-pixel units (sigma = 2^(J-1)).
// A plane whose grid stride is 2^grid_log2 input pixels therefore gets
// sigma / 2^grid_log2 in its own units and decimation down to the 2^J grid.
ImagePlane smooth_decimate_on_grid(const ImagePlane& plane, int grid_log2,
                                   const ScatterConfig& cfg) {
    if (grid_log2 < 0 || grid_log2 > cfg.levels)
        throw ParameterError("smoothing grid outside pyramid range");
    const int decim = 1 << (cfg.levels - grid_log2);
    if (plane.rows % decim != 0 || plane.cols % decim != 0)
        throw ShapeError("plane " + std::to_string(plane.rows) + "x" +
                         std::to_string(plane.cols) + " not divisible by " +
                         std::to_string(decim));
    const double sigma = std::pow(2.0, cfg.levels - 1 - grid_log2);
    const std::vector<double> w = gaussian_taps(sigma);
    return smooth_cols_decim(smooth_rows_decim(plane, w, decim), w, decim);
}

// --- config text -----------------------------------------------------------

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& s, const std::string& where, int lineno) {
    char* end = nullptr;
    const std::string t = strip(s);
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
        throw ParseError(where + ":" + std::to_string(lineno) + ": bad number '" + t + "'");
    return v;
}

} // namespace

void ScatterConfig::validate() const {
    if (levels < 2)
        throw ParameterError("levels must be >= 2 (second layer cascades one octave down)");
    if (levels > 6) throw ParameterError("levels > 6 unsupported");
    for (const auto& [j, k] : log_k) {
        if (j < 1) throw ParameterError("log offset declared for scale < 1");
        if (!(k > 0.0) || !std::isfinite(k))
            throw ParameterError("log offset k" + std::to_string(j) + " must be > 0");
    }
    if (resolution_factors.empty()) throw ParameterError("no resolution factors configured");
    for (double f : resolution_factors)
        if (!(f >= 1.0) || !std::isfinite(f))
            throw ParameterError("resolution factors must be finite and >= 1");
    if (!(pixel_scale > 0.0) || !std::isfinite(pixel_scale))
        throw ParameterError("pixel_scale must be positive");
}

ScatterConfig parse_scatter_config(const std::string& text, const std::string& source_name) {
    ScatterConfig cfg;
    bool saw_k = false, saw_factors = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(source_name + ":" + std::to_string(lineno) +
                             ": expected key=value, got '" + line + "'");
        const std::string key = strip(line.substr(0, eq));
        const std::string val = strip(line.substr(eq + 1));
        if (key == "levels") {
            cfg.levels = static_cast<int>(parse_number(val, source_name, lineno));
        } else if (key.size() >= 2 && key[0] == 'k' &&
                   key.find_first_not_of("0123456789", 1) == std::string::npos) {
            if (!saw_k) {
                cfg.log_k.clear();  // explicit offsets replace the default map
                saw_k = true;
            }
            cfg.log_k[std::stoi(key.substr(1))] = parse_number(val, source_name, lineno);
        } else if (key == "resolution_factors") {
            if (!saw_factors) {
                cfg.resolution_factors.clear();
                saw_factors = true;
            }
            std::istringstream vs(val);
            std::string item;
            while (std::getline(vs, item, ','))
                cfg.resolution_factors.push_back(parse_number(item, source_name, lineno));
        } else if (key == "alignment") {
            if (val == "area_average")
                cfg.alignment = OutputAlignment::kAreaAverage;
            else
                throw ParseError(source_name + ":" + std::to_string(lineno) +
                                 ": unknown alignment '" + val + "'");
        } else if (key == "pixel_scale") {
            cfg.pixel_scale = parse_number(val, source_name, lineno);
        } else {
            throw ParseError(source_name + ":" + std::to_string(lineno) + ": unknown key '" +
                             key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

ScatterConfig load_scatter_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scatter_config(ss.str(), path);
}

std::string canonical_config_text(const ScatterConfig& cfg) {
    std::ostringstream out;
    out << "alignment=area_average\n";
    for (const auto& [j, k] : cfg.log_k) out << "k" << j << "=" << fmt_double(k) << "\n";
    out << "levels=" << cfg.levels << "\n";
    out << "pixel_scale=" << fmt_double(cfg.pixel_scale) << "\n";
    out << "resolution_factors=";
    for (std::size_t i = 0; i < cfg.resolution_factors.size(); ++i) {
        if (i) out << ",";
        out << fmt_double(cfg.resolution_factors[i]);
    }
    out << "\n";
    return out.str();
}

std::uint64_t config_hash(const ScatterConfig& cfg) {
    return fnv1a64(canonical_config_text(cfg));
}

// --- paths -----------------------------------------------------------------

std::string ScatterPath::to_string() const {
    std::ostringstream out;
    char res[40];
    std::snprintf(res, sizeof res, "%.6g", resolution_factor);
    out << "res=" << res << " m=" << m;
    if (m == 0) out << " c=" << color;
    if (m >= 1) out << " j1=" << j1 << " r1=" << r1;
    if (m == 2) out << " j2=" << j2 << " r2=" << r2;
    return out.str();
}

ScatterPath ScatterPath::parse(const std::string& text) {
    ScatterPath p;
    std::istringstream in(text);
    std::string tok;
    bool saw_m = false;
    while (in >> tok) {
        const std::size_t eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError("bad path token '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        try {
            if (key == "res")
                p.resolution_factor = std::stod(val);
            else if (key == "m")
                p.m = std::stoi(val), saw_m = true;
            else if (key == "c")
                p.color = std::stoi(val);
            else if (key == "j1")
                p.j1 = std::stoi(val);
            else if (key == "r1")
                p.r1 = std::stoi(val);
            else if (key == "j2")
                p.j2 = std::stoi(val);
            else if (key == "r2")
                p.r2 = std::stoi(val);
            else
                throw ParseError("unknown path field '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ParseError("bad path value in '" + tok + "'");
        }
    }
    if (!saw_m) throw ParseError("path missing layer field: '" + text + "'");
    if (p.m < 0 || p.m > 2) throw ParseError("path layer out of range: '" + text + "'");
    return p;
}

// --- geometry --------------------------------------------------------------

namespace {

int snap_to_multiple(double v, int unit) {
    const long long k = std::llround(v / unit);
    return static_cast<int>(std::max(1LL, k)) * unit;
}

struct LerpTable {
    std::vector<int> i0, i1;
    std::vector<double> w;  // out = (1-w)*x[i0] + w*x[i1]
};

LerpTable make_lerp(int in_n, int out_n) {
    LerpTable t;
    t.i0.resize(static_cast<std::size_t>(out_n));
    t.i1.resize(static_cast<std::size_t>(out_n));
    t.w.resize(static_cast<std::size_t>(out_n));
    const double scale = static_cast<double>(in_n) / out_n;
    for (int d = 0; d < out_n; ++d) {
        const double src = (d + 0.5) * scale - 0.5;
        const double f = std::floor(src);
        const int i0 = static_cast<int>(f);
        t.w[static_cast<std::size_t>(d)] = src - f;
        t.i0[static_cast<std::size_t>(d)] = std::clamp(i0, 0, in_n - 1);
        t.i1[static_cast<std::size_t>(d)] = std::clamp(i0 + 1, 0, in_n - 1);
    }
    return t;
}

ImagePlane resample_plane(const ImagePlane& x, int out_r, int out_c) {
    const LerpTable tr = make_lerp(x.rows, out_r);
    const LerpTable tc = make_lerp(x.cols, out_c);
    ImagePlane mid(out_r, x.cols);
    for (int i = 0; i < out_r; ++i) {
        const double* a = x.row(tr.i0[static_cast<std::size_t>(i)]);
        const double* b = x.row(tr.i1[static_cast<std::size_t>(i)]);
        const double w = tr.w[static_cast<std::size_t>(i)];
        double* dst = mid.row(i);
        for (int j = 0; j < x.cols; ++j) dst[j] = (1.0 - w) * a[j] + w * b[j];
    }
    ImagePlane out(out_r, out_c);
    for (int i = 0; i < out_r; ++i) {
        const double* src = mid.row(i);
        double* dst = out.row(i);
        for (int j = 0; j < out_c; ++j) {
            const double w = tc.w[static_cast<std::size_t>(j)];
            dst[j] = (1.0 - w) * src[tc.i0[static_cast<std::size_t>(j)]] +
                     w * src[tc.i1[static_cast<std::size_t>(j)]];
        }
    }
    return out;
}

} // namespace

ImageRgb resample_image(const ImageRgb& image, double factor, int levels) {
    if (!(factor >= 1.0) || !std::isfinite(factor))
        throw ParameterError("resample factor must be >= 1");
    const int unit = 1 << levels;
    const int out_r = snap_to_multiple(factor * image.rows(), unit);
    const int out_c = snap_to_multiple(factor * image.cols(), unit);
    if (out_r == image.rows() && out_c == image.cols()) return image;
    ImageRgb out;
    out.r = resample_plane(image.r, out_r, out_c);
    out.g = resample_plane(image.g, out_r, out_c);
    out.b = resample_plane(image.b, out_r, out_c);
    return out;
}

ImagePlane area_average_resize(const ImagePlane& plane, int out_rows, int out_cols) {
    if (out_rows > plane.rows || out_cols > plane.cols || out_rows < 1 || out_cols < 1)
        throw ParameterError("area average only shrinks grids");
    if (out_rows == plane.rows && out_cols == plane.cols) return plane;
    auto spans = [](int in_n, int out_n) {
        // per output cell: list of (input index, overlap length)
        std::vector<std::vector<std::pair<int, double>>> sp(static_cast<std::size_t>(out_n));
        const double f = static_cast<double>(in_n) / out_n;
        for (int d = 0; d < out_n; ++d) {
            const double lo = d * f, hi = (d + 1) * f;
            for (int s = static_cast<int>(std::floor(lo)); s < in_n && s < hi; ++s) {
                const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
                if (overlap > 0) sp[static_cast<std::size_t>(d)].push_back({s, overlap / f});
            }
        }
        return sp;
    };
    const auto rs = spans(plane.rows, out_rows);
    const auto cs = spans(plane.cols, out_cols);
    ImagePlane mid(out_rows, plane.cols);
    for (int i = 0; i < out_rows; ++i) {
        double* dst = mid.row(i);
        for (const auto& [s, w] : rs[static_cast<std::size_t>(i)]) {
            const double* src = plane.row(s);
            for (int j = 0; j < plane.cols; ++j) dst[j] += w * src[j];
        }
    }
    ImagePlane out(out_rows, out_cols);
    for (int i = 0; i < out_rows; ++i) {
        const double* src = mid.row(i);
        double* dst = out.row(i);
        for (int j = 0; j < out_cols; ++j) {
            double acc = 0.0;
            for (const auto& [s, w] : cs[static_cast<std::size_t>(j)]) acc += w * src[s];
            dst[j] = acc;
        }
    }
    return out;
}

// --- pipeline stages ---------------------------------------------------------

ImagePlane smooth_decimate(const ImagePlane& plane, const ScatterConfig& cfg) {
    return smooth_decimate_on_grid(plane, 0, cfg);
}

std::vector<SubbandEnvelope> layer0(const ImageRgb& image, const ScatterConfig& cfg) {
    std::vector<SubbandEnvelope> out;
    out.reserve(3);
    for (int c = 0; c < 3; ++c) {
        SubbandEnvelope e;
        e.path.m = 0;
        e.path.color = c;
        e.plane = smooth_decimate_on_grid(image.channel(c), 0, cfg);
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<SubbandEnvelope> layer1_envelopes(const ImageRgb& image, const ScatterConfig& cfg,
                                              const WaveletFilterSet& filters) {
    std::array<DtcwtPyramid, 3> pyr;
    for (int c = 0; c < 3; ++c) pyr[static_cast<std::size_t>(c)] =
        dtcwt_forward(image.channel(c), cfg.levels, filters);
    std::vector<SubbandEnvelope> out;
    out.reserve(static_cast<std::size_t>(6 * cfg.levels));
    for (int j = 1; j <= cfg.levels; ++j) {
        for (int r = 0; r < 6; ++r) {
            SubbandEnvelope e;
            e.path.m = 1;
            e.path.j1 = j;
            e.path.r1 = r;
            const ImagePlane& ref =
                pyr[0].subbands[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(r)]
                    .real_part;
            e.plane = ImagePlane(ref.rows, ref.cols);
            for (int c = 0; c < 3; ++c) {
                const ComplexSubband& z =
                    pyr[static_cast<std::size_t>(c)]
                        .subbands[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(r)];
                for (std::size_t s = 0; s < e.plane.v.size(); ++s)
                    e.plane.v[s] += z.real_part.v[s] * z.real_part.v[s] +
                                    z.imag_part.v[s] * z.imag_part.v[s];
            }
            for (double& v : e.plane.v) v = std::sqrt(v);
            out.push_back(std::move(e));
        }
    }
    return out;
}

SubbandEnvelope parametric_log(const SubbandEnvelope& envelope, const ScatterConfig& cfg) {
    const auto it = cfg.log_k.find(envelope.path.j1);
    if (it == cfg.log_k.end()) return envelope;
    if (!(it->second > 0.0)) throw ParameterError("log offset must be > 0");
    SubbandEnvelope out = envelope;
    for (double& v : out.plane.v) v = std::log(v + it->second);
    return out;
}

std::vector<SubbandEnvelope> layer2_envelopes(const std::vector<SubbandEnvelope>& u1_scale1,
                                              const ScatterConfig& cfg,
                                              const WaveletFilterSet& filters) {
    if (cfg.levels < 2) throw ParameterError("second layer needs levels >= 2");
    if (u1_scale1.size() != 6)
        throw ParameterError("second layer expects the 6 scale-1 envelopes, got " +
                             std::to_string(u1_scale1.size()));
    for (const SubbandEnvelope& e : u1_scale1)
        if (!e.plane.same_shape(u1_scale1[0].plane))
            throw ShapeError("scale-1 envelope shapes disagree");
    std::vector<SubbandEnvelope> out;
    out.reserve(36);
    for (const SubbandEnvelope& e : u1_scale1) {
        // One more octave on the half-rate envelope grid: scale 2 relative to
        // the input image.
        DtcwtPyramid p = dtcwt_forward(e.plane, 1, filters);
        for (int r2 = 0; r2 < 6; ++r2) {
            SubbandEnvelope o;
            o.path.m = 2;
            o.path.j1 = e.path.j1;
            o.path.r1 = e.path.r1;
            o.path.j2 = e.path.j1 + 1;
            o.path.r2 = r2;
            o.plane = complex_magnitude(p.subbands[0][static_cast<std::size_t>(r2)]);
            out.push_back(std::move(o));
        }
    }
    return out;
}

FeatureTensor scatter_one_resolution(const ImageRgb& image, const ScatterConfig& cfg,
                                     const WaveletFilterSet& filters, double resolution_tag) {
    cfg.validate();
    const int unit = 1 << cfg.levels;
    if (image.rows() % unit != 0 || image.cols() % unit != 0)
        throw ShapeError("image " + std::to_string(image.rows()) + "x" +
                         std::to_string(image.cols()) + " not divisible by 2^levels");

    const int oh = image.rows() / unit;
    const int ow = image.cols() / unit;
    FeatureTensor t;
    t.height = oh;
    t.width = ow;
    t.channels = 3 + 6 * cfg.levels + 36;
    t.data.resize(static_cast<std::size_t>(t.channels) * oh * ow);
    t.manifest.reserve(static_cast<std::size_t>(t.channels));

    int ch = 0;
    auto push = [&](const ScatterPath& path, const ImagePlane& plane) {
        if (plane.rows != oh || plane.cols != ow)
            throw ShapeError("channel grid mismatch in assembly");
        ScatterPath p = path;
        p.resolution_factor = resolution_tag;
        t.manifest.push_back(p);
        std::copy(plane.v.begin(), plane.v.end(),
                  t.data.begin() + static_cast<std::ptrdiff_t>(ch) * oh * ow);
        ++ch;
    };

    for (const SubbandEnvelope& e : layer0(image, cfg)) push(e.path, e.plane);

    std::vector<SubbandEnvelope> u1 = layer1_envelopes(image, cfg, filters);
    std::vector<SubbandEnvelope> scale1_post;
    scale1_post.reserve(6);
    for (const SubbandEnvelope& e : u1) {
        SubbandEnvelope pl = parametric_log(e, cfg);
        push(pl.path, smooth_decimate_on_grid(pl.plane, pl.path.j1, cfg));
        if (e.path.j1 == 1) scale1_post.push_back(std::move(pl));
    }

    for (const SubbandEnvelope& e : layer2_envelopes(scale1_post, cfg, filters))
        push(e.path, smooth_decimate_on_grid(e.plane, e.path.j2, cfg));

    return t;
}

FeatureTensor extract_features(const ImageRgb& image, const ScatterConfig& cfg,
                               const WaveletFilterSet& filters) {
    cfg.validate();
    ImageRgb input = image;
    if (cfg.pixel_scale != 1.0)
        for (int c = 0; c < 3; ++c)
            for (double& v : (c == 0 ? input.r : c == 1 ? input.g : input.b).v)
                v *= cfg.pixel_scale;

    std::vector<FeatureTensor> streams;
    streams.reserve(cfg.resolution_factors.size());
    int min_h = 0, min_w = 0;
    for (double f : cfg.resolution_factors) {
        ImageRgb scaled = resample_image(input, f, cfg.levels);
        FeatureTensor t = scatter_one_resolution(scaled, cfg, filters, f);
        if (streams.empty() || t.height < min_h) min_h = t.height;
        if (streams.empty() || t.width < min_w) min_w = t.width;
        streams.push_back(std::move(t));
    }

    FeatureTensor out;
    out.height = min_h;
    out.width = min_w;
    out.channels = 0;
    for (const FeatureTensor& s : streams) out.channels += s.channels;
    out.data.resize(static_cast<std::size_t>(out.channels) * min_h * min_w);
    out.manifest.reserve(static_cast<std::size_t>(out.channels));

    std::size_t off = 0;
    for (const FeatureTensor& s : streams) {
        for (int c = 0; c < s.channels; ++c) {
            out.manifest.push_back(s.manifest[static_cast<std::size_t>(c)]);
            ImagePlane pl(s.height, s.width);
            std::copy_n(s.data.begin() + static_cast<std::ptrdiff_t>(c) * s.height * s.width,
                        pl.v.size(), pl.v.begin());
            if (s.height != min_h || s.width != min_w)
                pl = area_average_resize(pl, min_h, min_w);
            std::copy(pl.v.begin(), pl.v.end(), out.data.begin() + static_cast<std::ptrdiff_t>(off));
            off += pl.v.size();
        }
    }
    return out;
}

} // namespace scatnet
