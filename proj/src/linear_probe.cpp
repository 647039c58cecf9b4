#include "scatnet/linear_probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "scatnet/errors.hpp"

namespace scatnet {
namespace {

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64le(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double get_f64le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

// scores -> per-sample loss and softmax probabilities, numerically shifted
double softmax_ce(const std::vector<double>& scores, int label, std::vector<double>& probs) {
    const double m = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        probs[c] = std::exp(scores[c] - m);
        sum += probs[c];
    }
    for (double& p : probs) p /= sum;
    return -(scores[static_cast<std::size_t>(label)] - m - std::log(sum));
}

} // namespace

void ProbeHyperparams::validate(int train_size) const {
    if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw ParameterError("momentum must be in [0,1)");
    if (weight_decay < 0.0) throw ParameterError("weight decay must be >= 0");
    if (epochs < 1) throw ParameterError("epochs must be >= 1");
    const int b = batch_size == 0 ? default_batch_size(train_size) : batch_size;
    if (b < 1 || b > train_size)
        throw ParameterError("batch size " + std::to_string(b) + " outside [1, " +
                             std::to_string(train_size) + "]");
}

int default_batch_size(int train_size) {
    if (train_size >= 10000) return 100;
    if (train_size >= 5000) return 50;
    if (train_size >= 2000) return 20;
    if (train_size >= 1000) return 10;
    return std::max(1, std::min(5, train_size));
}

int ProbeModel::predict(const double* sample) const {
    int best = 0;
    double best_score = 0.0;
    for (int c = 0; c < classes; ++c) {
        const double* w = weights.data() + static_cast<std::size_t>(c) * dim;
        double s = bias[static_cast<std::size_t>(c)];
        for (int d = 0; d < dim; ++d) {
            const double sd = feat_std[static_cast<std::size_t>(d)];
            const double z = (sample[d] - feat_mean[static_cast<std::size_t>(d)]) / sd;
            s += w[d] * z;
        }
        if (c == 0 || s > best_score) {
            best = c;
            best_score = s;
        }
    }
    return best;
}

double probe_loss_gradient(const std::vector<double>& weights, const std::vector<double>& bias,
                           int classes, int dim, const DataMatrix& batch, double weight_decay,
                           std::vector<double>& grad_w, std::vector<double>& grad_b) {
    grad_w.assign(static_cast<std::size_t>(classes) * dim, 0.0);
    grad_b.assign(static_cast<std::size_t>(classes), 0.0);
    std::vector<double> scores(static_cast<std::size_t>(classes));
    std::vector<double> probs(static_cast<std::size_t>(classes));
    double loss = 0.0;
    for (int i = 0; i < batch.n; ++i) {
        const double* x = batch.sample(i);
        for (int c = 0; c < classes; ++c) {
            const double* w = weights.data() + static_cast<std::size_t>(c) * dim;
            double s = bias[static_cast<std::size_t>(c)];
            for (int d = 0; d < dim; ++d) s += w[d] * x[d];
            scores[static_cast<std::size_t>(c)] = s;
        }
        loss += softmax_ce(scores, batch.y[static_cast<std::size_t>(i)], probs);
        for (int c = 0; c < classes; ++c) {
            const double delta = probs[static_cast<std::size_t>(c)] -
                                 (c == batch.y[static_cast<std::size_t>(i)] ? 1.0 : 0.0);
            double* gw = grad_w.data() + static_cast<std::size_t>(c) * dim;
            for (int d = 0; d < dim; ++d) gw[d] += delta * x[d];
            grad_b[static_cast<std::size_t>(c)] += delta;
        }
    }
    const double inv_n = 1.0 / batch.n;
    loss *= inv_n;
    for (double& g : grad_w) g *= inv_n;
    for (double& g : grad_b) g *= inv_n;
    // decay applies to weights only, never the bias
    double penalty = 0.0;
    for (std::size_t s = 0; s < grad_w.size(); ++s) {
        penalty += weights[s] * weights[s];
        grad_w[s] += weight_decay * weights[s];
    }
    return loss + 0.5 * weight_decay * penalty;
}

TrainResult train_probe(const DataMatrix& train, const ProbeHyperparams& hp) {
    if (train.n < 1 || train.dim < 1) throw ParameterError("empty training set");
    hp.validate(train.n);
    for (double v : train.x)
        if (!std::isfinite(v)) throw DataError("non-finite value in training features");
    int classes = 0;
    for (int l : train.y) {
        if (l < 0) throw DataError("negative label");
        classes = std::max(classes, l + 1);
    }
    {
        std::vector<bool> present(static_cast<std::size_t>(classes), false);
        int distinct = 0;
        for (int l : train.y)
            if (!present[static_cast<std::size_t>(l)]) {
                present[static_cast<std::size_t>(l)] = true;
                ++distinct;
            }
        if (distinct < 2) throw ParameterError("training set needs at least 2 classes");
    }

    TrainResult res;
    ProbeModel& m = res.model;
    m.classes = classes;
    m.dim = train.dim;
    m.weights.assign(static_cast<std::size_t>(classes) * train.dim, 0.0);
    m.bias.assign(static_cast<std::size_t>(classes), 0.0);
    m.feat_mean.assign(static_cast<std::size_t>(train.dim), 0.0);
    m.feat_std.assign(static_cast<std::size_t>(train.dim), 1.0);

    for (int i = 0; i < train.n; ++i) {
        const double* x = train.sample(i);
        for (int d = 0; d < train.dim; ++d) m.feat_mean[static_cast<std::size_t>(d)] += x[d];
    }
    for (double& v : m.feat_mean) v /= train.n;
    std::vector<double> var(static_cast<std::size_t>(train.dim), 0.0);
    for (int i = 0; i < train.n; ++i) {
        const double* x = train.sample(i);
        for (int d = 0; d < train.dim; ++d) {
            const double c = x[d] - m.feat_mean[static_cast<std::size_t>(d)];
            var[static_cast<std::size_t>(d)] += c * c;
        }
    }
    for (int d = 0; d < train.dim; ++d) {
        const double s = std::sqrt(var[static_cast<std::size_t>(d)] / train.n);
        // Treat numerically-constant features as constant: rounding residue
        // in the variance would otherwise blow the samples up by ~1e15.
        const double tiny = 1e-12 * std::max(1.0, std::abs(m.feat_mean[static_cast<std::size_t>(d)]));
        m.feat_std[static_cast<std::size_t>(d)] = s > tiny ? s : 1.0;
    }

    // standardize once up front; the model folds the stats back in at predict
    DataMatrix z;
    z.n = train.n;
    z.dim = train.dim;
    z.y = train.y;
    z.x.resize(train.x.size());
    for (int i = 0; i < train.n; ++i) {
        const double* x = train.sample(i);
        double* dst = z.x.data() + static_cast<std::size_t>(i) * z.dim;
        for (int d = 0; d < train.dim; ++d)
            dst[d] = (x[d] - m.feat_mean[static_cast<std::size_t>(d)]) /
                     m.feat_std[static_cast<std::size_t>(d)];
    }

    const int batch = hp.batch_size == 0 ? default_batch_size(train.n) : hp.batch_size;
    std::mt19937_64 rng(hp.seed);
    std::vector<std::size_t> order(static_cast<std::size_t>(train.n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> vel_w(m.weights.size(), 0.0);
    std::vector<double> vel_b(m.bias.size(), 0.0);
    std::vector<double> grad_w, grad_b;
    DataMatrix mini;
    mini.dim = z.dim;
    res.epoch_loss.reserve(static_cast<std::size_t>(hp.epochs));
    int high_streak = 0;

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
            std::swap(order[i], order[j]);
        }
        double epoch_loss = 0.0;
        int covered = 0;
        for (int start = 0; start < train.n; start += batch) {
            const int count = std::min(batch, train.n - start);
            mini.n = count;
            mini.x.resize(static_cast<std::size_t>(count) * mini.dim);
            mini.y.resize(static_cast<std::size_t>(count));
            for (int k = 0; k < count; ++k) {
                const std::size_t src = order[static_cast<std::size_t>(start + k)];
                std::copy_n(z.x.begin() + static_cast<std::ptrdiff_t>(src) * z.dim, z.dim,
                            mini.x.begin() + static_cast<std::ptrdiff_t>(k) * z.dim);
                mini.y[static_cast<std::size_t>(k)] = z.y[src];
            }
            const double loss =
                probe_loss_gradient(m.weights, m.bias, classes, z.dim, mini, hp.weight_decay,
                                    grad_w, grad_b);
            epoch_loss += loss * count;
            covered += count;
            for (std::size_t s = 0; s < m.weights.size(); ++s) {
                vel_w[s] = hp.momentum * vel_w[s] - hp.learning_rate * grad_w[s];
                m.weights[s] += vel_w[s];
            }
            for (std::size_t s = 0; s < m.bias.size(); ++s) {
                vel_b[s] = hp.momentum * vel_b[s] - hp.learning_rate * grad_b[s];
                m.bias[s] += vel_b[s];
            }
        }
        const double mean_loss = epoch_loss / covered;
        if (!std::isfinite(mean_loss))
            throw DivergenceError("training loss became non-finite at epoch " +
                                  std::to_string(epoch + 1));
        res.epoch_loss.push_back(mean_loss);
        const double baseline = res.epoch_loss.front();
        if (epoch > 0 && mean_loss > 10.0 * baseline) {
            if (++high_streak >= 5)
                throw DivergenceError(
                    "training diverged: epoch " + std::to_string(epoch + 1) + " loss " +
                    std::to_string(mean_loss) + " exceeds 10x first-epoch loss " +
                    std::to_string(baseline) + " for 5 consecutive epochs");
        } else {
            high_streak = 0;
        }
    }
    return res;
}

EvalResult evaluate_probe(const ProbeModel& model, const DataMatrix& data) {
    if (data.dim != model.dim)
        throw ParameterError("feature dimension " + std::to_string(data.dim) +
                             " does not match model dimension " + std::to_string(model.dim));
    EvalResult r;
    r.classes = model.classes;
    r.confusion.assign(static_cast<std::size_t>(model.classes) * model.classes, 0);
    int wrong = 0;
    for (int i = 0; i < data.n; ++i) {
        const int truth = data.y[static_cast<std::size_t>(i)];
        if (truth < 0 || truth >= model.classes)
            throw ParameterError("label " + std::to_string(truth) + " outside model classes");
        const int pred = model.predict(data.sample(i));
        ++r.confusion[static_cast<std::size_t>(truth) * model.classes + pred];
        if (pred != truth) ++wrong;
    }
    r.error_rate = data.n > 0 ? static_cast<double>(wrong) / data.n : 0.0;
    return r;
}

void save_probe_model(const ProbeModel& model, const ProbeHyperparams& hp,
                      const std::string& path) {
    std::string out = "SCATLP01";
    put_u32le(out, 1);
    put_u32le(out, static_cast<std::uint32_t>(model.classes));
    put_u32le(out, static_cast<std::uint32_t>(model.dim));
    out.push_back(8);
    for (double v : model.feat_mean) put_f64le(out, v);
    for (double v : model.feat_std) put_f64le(out, v);
    for (double v : model.weights) put_f64le(out, v);
    for (double v : model.bias) put_f64le(out, v);
    char num[40];
    std::ostringstream text;
    text << "hyper 1\n";
    std::snprintf(num, sizeof num, "%.17g", hp.learning_rate);
    text << "learning_rate " << num << "\n";
    std::snprintf(num, sizeof num, "%.17g", hp.momentum);
    text << "momentum " << num << "\n";
    std::snprintf(num, sizeof num, "%.17g", hp.weight_decay);
    text << "weight_decay " << num << "\n";
    text << "epochs " << hp.epochs << "\n";
    text << "batch_size " << hp.batch_size << "\n";
    text << "seed " << hp.seed << "\n";
    text << "end\n";
    out += text.str();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("write failed: " + path);
}

LoadedModel load_probe_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    constexpr std::size_t kHeader = 8 + 3 * 4 + 1;
    if (bytes.size() < kHeader || bytes.compare(0, 8, "SCATLP01") != 0)
        throw FormatError(path + ": missing SCATLP01 header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (get_u32le(p + 8) != 1) throw FormatError(path + ": unsupported version");
    LoadedModel lm;
    ProbeModel& m = lm.model;
    m.classes = static_cast<int>(get_u32le(p + 12));
    m.dim = static_cast<int>(get_u32le(p + 16));
    if (p[20] != 8) throw FormatError(path + ": bad scalar width");
    if (m.classes < 1 || m.dim < 1) throw FormatError(path + ": degenerate model shape");
    const std::size_t vals = 2 * static_cast<std::size_t>(m.dim) +
                             static_cast<std::size_t>(m.classes) * m.dim +
                             static_cast<std::size_t>(m.classes);
    if (bytes.size() < kHeader + vals * 8)
        throw FormatError(path + ": payload shorter than header declares");
    const unsigned char* q = p + kHeader;
    auto take = [&](std::vector<double>& dst, std::size_t n) {
        dst.resize(n);
        for (std::size_t s = 0; s < n; ++s, q += 8) dst[s] = get_f64le(q);
    };
    take(m.feat_mean, static_cast<std::size_t>(m.dim));
    take(m.feat_std, static_cast<std::size_t>(m.dim));
    take(m.weights, static_cast<std::size_t>(m.classes) * m.dim);
    take(m.bias, static_cast<std::size_t>(m.classes));

    std::istringstream text(bytes.substr(kHeader + vals * 8));
    std::string line;
    bool saw_end = false;
    while (std::getline(text, line)) {
        if (line == "end") {
            saw_end = true;
            break;
        }
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "hyper") continue;
        else if (tag == "learning_rate") ls >> lm.hp.learning_rate;
        else if (tag == "momentum") ls >> lm.hp.momentum;
        else if (tag == "weight_decay") ls >> lm.hp.weight_decay;
        else if (tag == "epochs") ls >> lm.hp.epochs;
        else if (tag == "batch_size") ls >> lm.hp.batch_size;
        else if (tag == "seed") ls >> lm.hp.seed;
        else if (!tag.empty()) throw FormatError(path + ": unknown model field '" + tag + "'");
    }
    if (!saw_end) throw FormatError(path + ": model text block not terminated");
    return lm;
}

} // namespace scatnet
