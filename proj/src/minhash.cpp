#include "afrisynth/minhash.hpp"

#include <algorithm>
#include <cmath>

#include "afrisynth/error.hpp"
#include "afrisynth/util.hpp"

namespace afrisynth {
namespace {

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t mod_mersenne61(unsigned __int128 x) {
    std::uint64_t lo = static_cast<std::uint64_t>(x & kMersenne61);
    std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
    std::uint64_t r = lo + hi;
    while (r >= kMersenne61) r -= kMersenne61;
    return r;
}

std::uint64_t base_hash(std::string_view shingle) {
    std::uint64_t state = fnv1a64(shingle);
    return splitmix64(state) % kMersenne61;
}

}  // namespace

ShingleSet shingles(std::string_view text, std::size_t k) {
    if (k == 0) throw std::invalid_argument("shingle size must be >= 1");
    const std::string lowered = ascii_lower(text);
    const auto words = split_words(lowered);
    if (words.empty()) throw Error(ErrorKind::EmptyText, "cannot shingle empty text");
    ShingleSet out;
    if (words.size() < k) {
        std::string whole;
        for (auto w : words) {
            if (!whole.empty()) whole.push_back(' ');
            whole.append(w);
        }
        out.insert(std::move(whole));
        return out;
    }
    for (std::size_t i = 0; i + k <= words.size(); ++i) {
        std::string s(words[i]);
        for (std::size_t j = 1; j < k; ++j) {
            s.push_back(' ');
            s.append(words[i + j]);
        }
        out.insert(std::move(s));
    }
    return out;
}

MinHashSignature minhash(const ShingleSet& shingle_set, std::size_t num_perms, std::uint64_t seed) {
    if (shingle_set.empty()) throw Error(ErrorKind::EmptySet, "cannot sign an empty shingle set");
    if (num_perms == 0) throw std::invalid_argument("num_perms must be >= 1");

    std::vector<std::uint64_t> a(num_perms), b(num_perms);
    std::uint64_t state = seed;
    for (std::size_t i = 0; i < num_perms; ++i) {
        a[i] = splitmix64(state) % (kMersenne61 - 1) + 1;
        b[i] = splitmix64(state) % kMersenne61;
    }

    MinHashSignature sig;
    sig.seed = seed;
    sig.values.assign(num_perms, kMersenne61);
    for (const auto& sh : shingle_set) {
        const std::uint64_t x = base_hash(sh);
        for (std::size_t i = 0; i < num_perms; ++i) {
            const auto h = mod_mersenne61(static_cast<unsigned __int128>(a[i]) * x + b[i]);
            if (h < sig.values[i]) sig.values[i] = h;
        }
    }
    return sig;
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.num_perms() != b.num_perms() || a.seed != b.seed || a.num_perms() == 0) {
        throw Error(ErrorKind::IncompatibleSignatures, "signatures differ in length or seed");
    }
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) same += a.values[i] == b.values[i];
    return static_cast<double>(same) / static_cast<double>(a.values.size());
}

LshIndex::LshIndex(std::size_t bands, std::size_t rows) : bands_(bands), rows_(rows), buckets_(bands) {
    if (bands == 0 || rows == 0) throw std::invalid_argument("bands and rows must be >= 1");
}

double LshIndex::threshold() const {
    return std::pow(1.0 / static_cast<double>(bands_), 1.0 / static_cast<double>(rows_));
}

void LshIndex::check(const MinHashSignature& sig) const {
    if (sig.num_perms() != num_perms()) {
        throw Error(ErrorKind::IncompatibleSignatures,
                    "signature has " + std::to_string(sig.num_perms()) + " perms, index expects " +
                        std::to_string(num_perms()));
    }
    if (seed_ && *seed_ != sig.seed) throw Error(ErrorKind::IncompatibleSignatures, "signature seed differs from index");
}

std::uint64_t LshIndex::band_hash(const MinHashSignature& sig, std::size_t band) const {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t r = 0; r < rows_; ++r) {
        std::uint64_t v = sig.values[band * rows_ + r];
        h ^= splitmix64(v);
        h *= 0x100000001B3ULL;
    }
    return h;
}

void LshIndex::insert(const std::string& item_id, const MinHashSignature& sig) {
    check(sig);
    if (slot_.contains(item_id)) return;
    if (!seed_) seed_ = sig.seed;
    const std::size_t idx = ids_.size();
    ids_.push_back(item_id);
    sigs_.push_back(sig);
    slot_.emplace(item_id, idx);
    for (std::size_t band = 0; band < bands_; ++band) buckets_[band][band_hash(sig, band)].push_back(idx);
}

std::vector<std::string> LshIndex::candidates(const MinHashSignature& sig) const {
    check(sig);
    std::vector<std::size_t> hits;
    for (std::size_t band = 0; band < bands_; ++band) {
        const auto it = buckets_[band].find(band_hash(sig, band));
        if (it != buckets_[band].end()) hits.insert(hits.end(), it->second.begin(), it->second.end());
    }
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
    std::vector<std::string> out;
    out.reserve(hits.size());
    for (auto i : hits) out.push_back(ids_[i]);
    return out;
}

const MinHashSignature* LshIndex::signature(const std::string& item_id) const {
    const auto it = slot_.find(item_id);
    return it == slot_.end() ? nullptr : &sigs_[it->second];
}

void DedupParams::validate() const {
    if (shingle_size == 0) throw Error(ErrorKind::Config, "dedup.shingle_size must be >= 1");
    if (!(threshold > 0 && threshold <= 1)) throw Error(ErrorKind::Config, "dedup.threshold must be in (0,1]");
    if (bands == 0 || rows == 0) throw Error(ErrorKind::Config, "dedup.bands and dedup.rows must be >= 1");
    if (bands * rows != num_perms) throw Error(ErrorKind::Config, "dedup.bands * dedup.rows must equal num_perms");
}

DedupParams DedupParams::from_json(const nlohmann::json& j) {
    DedupParams p;
    try {
        p.shingle_size = j.value("shingle_size", p.shingle_size);
        p.threshold = j.value("threshold", p.threshold);
        p.num_perms = j.value("num_perms", p.num_perms);
        p.bands = j.value("bands", p.bands);
        p.rows = j.value("rows", p.rows);
        p.seed = j.value("seed", p.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, std::string("dedup: ") + e.what());
    }
    p.validate();
    return p;
}

namespace {

std::optional<MinHashSignature> try_sign(std::string_view text, const DedupParams& params) {
    if (split_words(text).empty()) return std::nullopt;
    return minhash(shingles(text, params.shingle_size), params.num_perms, params.seed);
}

}  // namespace

DedupResult dedup(std::span<const TextItem> items, const DedupParams& params) {
    params.validate();
    DedupResult result;
    LshIndex index(params.bands, params.rows);
    for (const auto& item : items) {
        const auto sig = try_sign(item.text, params);
        if (!sig) {
            result.kept_ids.push_back(item.id);
            continue;
        }
        std::optional<DroppedPair> best;
        for (const auto& cand : index.candidates(*sig)) {
            const double est = estimate_jaccard(*sig, *index.signature(cand));
            if (est >= params.threshold && (!best || est > best->estimate)) {
                best = DroppedPair{item.id, cand, est};
            }
        }
        if (best) {
            result.dropped.push_back(std::move(*best));
        } else {
            result.kept_ids.push_back(item.id);
            index.insert(item.id, *sig);
        }
    }
    return result;
}

DecontaminationResult decontaminate(std::span<const TextItem> train, std::span<const std::string> eval_set,
                                    const DedupParams& params) {
    params.validate();
    if (eval_set.empty()) throw std::invalid_argument("decontaminate: eval set must be non-empty");
    LshIndex index(params.bands, params.rows);
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
        if (auto sig = try_sign(eval_set[i], params)) index.insert("eval:" + std::to_string(i), *sig);
    }

    DecontaminationResult result;
    for (const auto& item : train) {
        const auto sig = try_sign(item.text, params);
        std::optional<DroppedPair> hit;
        if (sig) {
            for (const auto& cand : index.candidates(*sig)) {
                const double est = estimate_jaccard(*sig, *index.signature(cand));
                if (est >= params.threshold && (!hit || est > hit->estimate)) hit = DroppedPair{item.id, cand, est};
            }
        }
        if (hit) result.removed.push_back(std::move(*hit));
        else result.kept_ids.push_back(item.id);
    }
    return result;
}

nlohmann::ordered_json to_json(const DroppedPair& pair) {
    nlohmann::ordered_json j;
    j["dropped_id"] = pair.dropped_id;
    j["kept_id"] = pair.kept_id;
    j["estimate"] = pair.estimate;
    return j;
}

std::string drop_report_jsonl(const std::vector<DroppedPair>& dropped) {
    std::vector<nlohmann::ordered_json> rows;
    rows.reserve(dropped.size());
    for (const auto& d : dropped) rows.push_back(to_json(d));
    return to_jsonl(rows);
}

}  // namespace afrisynth
