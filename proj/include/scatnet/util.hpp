#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace scatnet {

// FNV-1a 64-bit; used for config fingerprints in manifests and reports.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex16(std::uint64_t v);

// Runs fn(0..count-1) on `threads` workers pulling indices from a shared
// counter. Work items must be independent and write only to their own slots,
// which keeps results identical for any thread count.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// Structured run report: ordered key=value lines, one metric per line.
class RunReport {
  public:
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, double value);
    void add(const std::string& key, std::uint64_t value);
    void add(const std::string& key, int value);
    std::string text() const;
    void write(const std::string& path) const;

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

} // namespace scatnet
