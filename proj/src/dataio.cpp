#include "scatnet/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "scatnet/errors.hpp"
#include "scatnet/util.hpp"

namespace scatnet {
namespace {

constexpr int kCifarSide = 32;
constexpr std::size_t kCifarRecord = 1 + 3 * kCifarSide * kCifarSide;

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f64le(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_f64le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void put_f32le(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32le(out, bits);
}

float get_f32le(const unsigned char* p) {
    std::uint32_t bits = get_u32le(p);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace

std::vector<LabeledImage> load_cifar10_batch(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    if (bytes.size() % kCifarRecord != 0)
        throw FormatError(path + ": size " + std::to_string(bytes.size()) +
                          " is not a multiple of " + std::to_string(kCifarRecord));
    const std::size_t count = bytes.size() / kCifarRecord;
    std::vector<LabeledImage> out;
    out.reserve(count);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    for (std::size_t rec = 0; rec < count; ++rec, p += kCifarRecord) {
        LabeledImage li;
        if (p[0] > 9)
            throw FormatError(path + ": record " + std::to_string(rec) + " has label " +
                              std::to_string(p[0]));
        li.label = p[0];
        li.source_index = static_cast<int>(rec);
        li.image.r = ImagePlane(kCifarSide, kCifarSide);
        li.image.g = ImagePlane(kCifarSide, kCifarSide);
        li.image.b = ImagePlane(kCifarSide, kCifarSide);
        const std::size_t plane = kCifarSide * kCifarSide;
        for (std::size_t s = 0; s < plane; ++s) {
            li.image.r.v[s] = p[1 + s] / 255.0;
            li.image.g.v[s] = p[1 + plane + s] / 255.0;
            li.image.b.v[s] = p[1 + 2 * plane + s] / 255.0;
        }
        out.push_back(std::move(li));
    }
    return out;
}

std::vector<LabeledImage> sample_balanced_subset(const std::vector<LabeledImage>& data,
                                                 int total, std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < data.size(); ++i) by_class[data[i].label].push_back(i);
    if (by_class.size() < 2) throw ParameterError("need at least 2 classes to sample");
    const int classes = static_cast<int>(by_class.size());
    if (total <= 0 || total % classes != 0)
        throw ParameterError("subset size " + std::to_string(total) +
                             " not divisible by class count " + std::to_string(classes));
    const int per = total / classes;
    for (const auto& [label, members] : by_class)
        if (static_cast<int>(members.size()) < per)
            throw ParameterError("class " + std::to_string(label) + " has only " +
                                 std::to_string(members.size()) + " members, need " +
                                 std::to_string(per));
    // One generator drives all class shuffles in ascending label order, so
    // the draw is a deterministic function of (data, total, seed). Index math
    // avoids std distribution objects: their outputs are not pinned by the
    // standard across library implementations.
    std::mt19937_64 rng(seed);
    std::vector<LabeledImage> out;
    out.reserve(static_cast<std::size_t>(total));
    for (auto& [label, members] : by_class) {
        for (std::size_t i = members.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
            std::swap(members[i], members[j]);
        }
        for (int k = 0; k < per; ++k) out.push_back(data[members[static_cast<std::size_t>(k)]]);
    }
    return out;
}

ImageRgb load_ppm(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < bytes.size()) {
            if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (start == pos) throw FormatError(path + ": truncated header");
        return bytes.substr(start, pos - start);
    };
    if (next_token() != "P6") throw FormatError(path + ": not a binary P6 pixmap");
    long w = 0, h = 0, maxval = 0;
    try {
        w = std::stol(next_token());
        h = std::stol(next_token());
        maxval = std::stol(next_token());
    } catch (const std::exception&) {
        throw FormatError(path + ": malformed header");
    }
    if (w <= 0 || h <= 0) throw FormatError(path + ": degenerate dimensions");
    if (maxval <= 0 || maxval > 255) throw FormatError(path + ": unsupported maxval");
    ++pos;  // single whitespace after maxval
    const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
    if (bytes.size() - pos < need) throw FormatError(path + ": truncated pixel payload");
    ImageRgb img;
    img.r = ImagePlane(static_cast<int>(h), static_cast<int>(w));
    img.g = ImagePlane(static_cast<int>(h), static_cast<int>(w));
    img.b = ImagePlane(static_cast<int>(h), static_cast<int>(w));
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
    for (std::size_t s = 0; s < static_cast<std::size_t>(w) * h; ++s) {
        img.r.v[s] = p[3 * s] / static_cast<double>(maxval);
        img.g.v[s] = p[3 * s + 1] / static_cast<double>(maxval);
        img.b.v[s] = p[3 * s + 2] / static_cast<double>(maxval);
    }
    return img;
}

void write_ppm(const ImageRgb& image, const std::string& path) {
    if (image.rows() <= 0 || image.cols() <= 0) throw ParameterError("empty image");
    std::string out = "P6\n" + std::to_string(image.cols()) + " " +
                      std::to_string(image.rows()) + "\n255\n";
    auto quant = [](double v) {
        return static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    };
    for (std::size_t s = 0; s < image.r.v.size(); ++s) {
        out.push_back(quant(image.r.v[s]));
        out.push_back(quant(image.g.v[s]));
        out.push_back(quant(image.b.v[s]));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("write failed: " + path);
}

void write_features(const FeatureSet& fs, const std::string& path, int scalar_width) {
    if (scalar_width != 4 && scalar_width != 8)
        throw ParameterError("scalar width must be 4 or 8, got " + std::to_string(scalar_width));
    if (fs.tensors.size() != fs.labels.size())
        throw ParameterError("tensor/label count mismatch");
    const std::uint32_t count = static_cast<std::uint32_t>(fs.tensors.size());
    std::uint32_t ch = 0, hh = 0, ww = 0;
    if (count > 0) {
        ch = static_cast<std::uint32_t>(fs.tensors[0].channels);
        hh = static_cast<std::uint32_t>(fs.tensors[0].height);
        ww = static_cast<std::uint32_t>(fs.tensors[0].width);
        for (const FeatureTensor& t : fs.tensors)
            if (static_cast<std::uint32_t>(t.channels) != ch ||
                static_cast<std::uint32_t>(t.height) != hh ||
                static_cast<std::uint32_t>(t.width) != ww || t.manifest != fs.tensors[0].manifest)
                throw ParameterError("feature tensors are not homogeneous");
    }

    std::string out;
    out.reserve(64 + static_cast<std::size_t>(count) * ch * hh * ww * scalar_width);
    out += "SCATFT01";
    put_u32le(out, 1);  // version
    put_u32le(out, count);
    put_u32le(out, ch);
    put_u32le(out, hh);
    put_u32le(out, ww);
    out.push_back(static_cast<char>(scalar_width));
    for (const FeatureTensor& t : fs.tensors) {
        if (scalar_width == 8)
            for (double v : t.data) put_f64le(out, v);
        else
            for (double v : t.data) put_f32le(out, static_cast<float>(v));
    }

    out += "manifest 1\n";
    out += "seed " + std::to_string(fs.seed) + "\n";
    out += "config-hash " + (fs.config_hash.empty() ? std::string("0") : fs.config_hash) + "\n";
    if (count > 0)
        for (std::size_t c = 0; c < fs.tensors[0].manifest.size(); ++c)
            out += "channel " + std::to_string(c) + " " + fs.tensors[0].manifest[c].to_string() +
                   "\n";
    out += "labels";
    for (int l : fs.labels) out += " " + std::to_string(l);
    out += "\nend\n";

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("write failed: " + path);
}

FeatureSet read_features(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    constexpr std::size_t kHeader = 8 + 5 * 4 + 1;
    if (bytes.size() < kHeader || bytes.compare(0, 8, "SCATFT01") != 0)
        throw FormatError(path + ": missing SCATFT01 header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t version = get_u32le(p + 8);
    const std::uint32_t count = get_u32le(p + 12);
    const std::uint32_t ch = get_u32le(p + 16);
    const std::uint32_t hh = get_u32le(p + 20);
    const std::uint32_t ww = get_u32le(p + 24);
    const int sw = p[28];
    if (version != 1) throw FormatError(path + ": unsupported version");
    if (sw != 4 && sw != 8) throw FormatError(path + ": bad scalar width");
    const std::size_t plane = static_cast<std::size_t>(ch) * hh * ww;
    const std::size_t payload = static_cast<std::size_t>(count) * plane * static_cast<std::size_t>(sw);
    if (bytes.size() < kHeader + payload)
        throw FormatError(path + ": payload shorter than header declares");

    FeatureSet fs;
    fs.tensors.resize(count);
    const unsigned char* q = p + kHeader;
    for (std::uint32_t i = 0; i < count; ++i) {
        FeatureTensor& t = fs.tensors[i];
        t.channels = static_cast<int>(ch);
        t.height = static_cast<int>(hh);
        t.width = static_cast<int>(ww);
        t.data.resize(plane);
        for (std::size_t s = 0; s < plane; ++s, q += sw)
            t.data[s] = (sw == 8) ? get_f64le(q) : static_cast<double>(get_f32le(q));
    }

    std::istringstream manifest(bytes.substr(kHeader + payload));
    std::string line;
    std::vector<ScatterPath> paths;
    bool saw_end = false;
    while (std::getline(manifest, line)) {
        if (line == "end") {
            saw_end = true;
            break;
        }
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "manifest") {
            continue;
        } else if (tag == "seed") {
            ls >> fs.seed;
        } else if (tag == "config-hash") {
            ls >> fs.config_hash;
        } else if (tag == "channel") {
            std::size_t idx;
            ls >> idx;
            std::string rest;
            std::getline(ls, rest);
            if (idx != paths.size()) throw FormatError(path + ": channel lines out of order");
            try {
                paths.push_back(ScatterPath::parse(rest));
            } catch (const ParseError& e) {
                throw FormatError(path + ": bad channel path: " + e.what());
            }
        } else if (tag == "labels") {
            int l;
            while (ls >> l) fs.labels.push_back(l);
        } else if (!tag.empty()) {
            throw FormatError(path + ": unknown manifest line '" + tag + "'");
        }
    }
    if (!saw_end) throw FormatError(path + ": manifest not terminated");
    if (count > 0 && paths.size() != ch)
        throw FormatError(path + ": manifest lists " + std::to_string(paths.size()) +
                          " channels, header says " + std::to_string(ch));
    if (fs.labels.size() != count)
        throw FormatError(path + ": label count mismatches tensor count");
    for (FeatureTensor& t : fs.tensors) t.manifest = paths;
    return fs;
}

} // namespace scatnet
