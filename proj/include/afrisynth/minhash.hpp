#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace afrisynth {

using ShingleSet = std::set<std::string>;

/// Word k-grams of the lowercased, whitespace-normalized text. Texts shorter
/// than k words give a single shingle holding the whole normalized text.
ShingleSet shingles(std::string_view text, std::size_t k);

struct MinHashSignature {
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> values;

    [[nodiscard]] std::size_t num_perms() const noexcept { return values.size(); }
    friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;
};

/// values[i] = min over shingles of h_i(shingle), where
/// h_i(x) = (a_i * base(x) + b_i) mod (2^61 - 1) and (a_i, b_i) come from a
/// splitmix64 stream seeded with `seed`.
MinHashSignature minhash(const ShingleSet& shingle_set, std::size_t num_perms, std::uint64_t seed);

/// Fraction of positions where the signatures agree.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

/// Banded LSH over MinHash signatures: `bands` bands of `rows` rows each.
class LshIndex {
public:
    LshIndex(std::size_t bands, std::size_t rows);

    /// Idempotent per item_id; re-inserting an id is a no-op.
    void insert(const std::string& item_id, const MinHashSignature& sig);

    /// Ids sharing at least one band bucket with `sig`, in insertion order.
    [[nodiscard]] std::vector<std::string> candidates(const MinHashSignature& sig) const;

    [[nodiscard]] const MinHashSignature* signature(const std::string& item_id) const;
    [[nodiscard]] bool contains(const std::string& item_id) const { return slot_.contains(item_id); }
    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] std::size_t bands() const noexcept { return bands_; }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t num_perms() const noexcept { return bands_ * rows_; }
    /// Similarity at which the banding S-curve crosses 1/2: (1/bands)^(1/rows).
    [[nodiscard]] double threshold() const;

private:
    void check(const MinHashSignature& sig) const;
    std::uint64_t band_hash(const MinHashSignature& sig, std::size_t band) const;

    std::size_t bands_;
    std::size_t rows_;
    std::optional<std::uint64_t> seed_;
    std::vector<std::string> ids_;
    std::vector<MinHashSignature> sigs_;
    std::unordered_map<std::string, std::size_t> slot_;
    std::vector<std::unordered_map<std::uint64_t, std::vector<std::size_t>>> buckets_;  // per band
};

struct DedupParams {
    std::size_t shingle_size = 3;
    double threshold = 0.8;
    std::size_t num_perms = 256;
    std::size_t bands = 32;
    std::size_t rows = 8;
    std::uint64_t seed = 1;

    void validate() const;
    static DedupParams from_json(const nlohmann::json& j);
};

struct TextItem {
    std::string id;
    std::string text;
};

struct DroppedPair {
    std::string dropped_id;
    std::string kept_id;
    double estimate = 0;
};

struct DedupResult {
    std::vector<std::string> kept_ids;
    std::vector<DroppedPair> dropped;
};

/// Keep-first near-duplicate removal: an item is dropped iff an earlier kept
/// item is an LSH candidate whose estimated Jaccard is >= threshold. The
/// recorded witness is the best-scoring such kept item (earliest on ties).
/// Items with no words are kept and never compared.
DedupResult dedup(std::span<const TextItem> items, const DedupParams& params);

struct DecontaminationResult {
    std::vector<std::string> kept_ids;
    std::vector<DroppedPair> removed;  // kept_id holds the matching eval index as "eval:<i>"
};

/// Removes training items whose estimated Jaccard against any eval text is
/// >= threshold. Eval texts are only read.
DecontaminationResult decontaminate(std::span<const TextItem> train, std::span<const std::string> eval_set,
                                    const DedupParams& params);

nlohmann::ordered_json to_json(const DroppedPair& pair);
std::string drop_report_jsonl(const std::vector<DroppedPair>& dropped);

}  // namespace afrisynth
