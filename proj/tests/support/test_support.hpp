#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "afrisynth/clock.hpp"
#include "afrisynth/gateway.hpp"
#include "afrisynth/mock_backend.hpp"

namespace testing_support {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("afrisynth_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Gateway over a mock backend and a manual clock: retries never sleep for real.
struct MockRig {
    std::shared_ptr<afrisynth::MockBackend> backend = std::make_shared<afrisynth::MockBackend>();
    std::shared_ptr<afrisynth::ManualClock> clock = std::make_shared<afrisynth::ManualClock>();
    std::unique_ptr<afrisynth::Gateway> gateway;

    explicit MockRig(afrisynth::GatewayConfig config = {}) {
        gateway = std::make_unique<afrisynth::Gateway>(config, backend, clock);
    }
    afrisynth::Gateway& gw() { return *gateway; }
};

/// Exact Jaccard over two sets, the brute-force oracle for MinHash/LSH checks.
template <typename T>
double exact_jaccard(const std::set<T>& a, const std::set<T>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

/// Pseudo-random vocabulary word "w<n>" drawn so texts share few shingles.
inline std::string random_words(std::mt19937_64& rng, std::size_t n, std::size_t vocab = 50000) {
    std::uniform_int_distribution<std::size_t> dist(0, vocab - 1);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += "w" + std::to_string(dist(rng));
    }
    return out;
}

/// Replaces the last `j` words with fresh ones. For a text of n >= j + 2 words
/// and 3-word shingles this swaps exactly j shingles.
inline std::string replace_tail(const std::string& text, std::size_t j, std::mt19937_64& rng) {
    std::vector<std::string> words;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find(' ', start);
        if (end == std::string::npos) end = text.size();
        words.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    std::uniform_int_distribution<std::uint64_t> dist;
    for (std::size_t i = words.size() - j; i < words.size(); ++i) words[i] = "fresh" + std::to_string(dist(rng));
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) out += (i ? " " : "") + words[i];
    return out;
}

}  // namespace testing_support
