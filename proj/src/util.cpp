#include "scatnet/util.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace scatnet {

std::string to_hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads < 1) threads = 1;
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int n = threads;
    if (static_cast<std::size_t>(n) > count) n = static_cast<int>(count);
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

void RunReport::add(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
}

void RunReport::add(const std::string& key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    entries_.emplace_back(key, buf);
}

void RunReport::add(const std::string& key, std::uint64_t value) {
    entries_.emplace_back(key, std::to_string(value));
}

void RunReport::add(const std::string& key, int value) {
    entries_.emplace_back(key, std::to_string(value));
}

std::string RunReport::text() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

void RunReport::write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open report file: " + path);
    f << text();
}

} // namespace scatnet
