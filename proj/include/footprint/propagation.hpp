#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "footprint/category.hpp"
#include "footprint/corpus.hpp"
#include "footprint/labeling.hpp"
#include "footprint/time.hpp"

namespace footprint {

// Half-open calendar window [start, end). Subspans tile the dataset
// timeframe; the last one may be shorter than the nominal width.
struct Subspan {
    int index = 0;
    UtcTime start = 0;
    UtcTime end = 0;
};

// Contiguous width-month windows from `start` until the first boundary at or
// past `end`. Month arithmetic is calendar-based (adding months, clamping
// the day), so widths track civil months, not fixed second counts.
std::vector<Subspan> partition_subspans(UtcTime start, UtcTime end, int width_months);
std::vector<Subspan> partition_subspans(const Dataset& dataset, int width_months);

// Hashtags observed in one subspan, densely numbered in lexicographic order.
struct SubspanVocabulary {
    int subspan_index = 0;
    std::map<std::string, int> dims;
    std::size_t size() const { return dims.size(); }
};

// One matrix column: an account's hashtag counts within one subspan.
struct SparseHashtagVector {
    std::string account_id;
    int subspan_index = 0;
    std::vector<std::pair<int, double>> entries;  // (dimension, weight), dims strictly increasing
    double norm = 0;                               // cached L2 norm
};

// U = uncategorized columns, V = categorized columns, one shared vocabulary.
struct SimilarityMatrices {
    SubspanVocabulary vocabulary;
    std::vector<SparseHashtagVector> u;
    std::vector<SparseHashtagVector> v;
    std::vector<Category> v_category;  // parallel to v
};

enum class VectorMode { Counts, Binary };

// Builds U and V for one subspan from the accounts active (>= 1 hashtag) in
// it. Throws NoCategorizedActivity when no labeled account is active, which
// callers treat as "skip this subspan".
SimilarityMatrices build_vectors(const Dataset& dataset, const Subspan& subspan,
                                 const SeedLabelSet& labels,
                                 VectorMode mode = VectorMode::Counts);

// dot(u,v) / (|u||v|), computed over the sorted dimension lists in ascending
// dimension order; result clamped to [0, 1]. Throws ZeroVector on an empty
// column.
double cosine_similarity(const SparseHashtagVector& u, const SparseHashtagVector& v);

// One subspan's verdict for one account.
struct SubspanAssignment {
    Category category = Category::Uncategorized;
    double score = 0;
    bool low_confidence = false;   // best score below the configured floor
    std::string matched_account;   // the argmax V column
};

// (account_id, assignment) for each U column, in U column order. Ties on
// score break by category order, then by matched account id. Parallelized
// over columns; output is bit-identical regardless of thread count.
std::vector<std::pair<std::string, SubspanAssignment>> assign_impermanent(
    const SimilarityMatrices& matrices, double low_confidence_floor = 0.05);

// An account's per-subspan trail.
struct ImpermanentAssignment {
    std::string account_id;
    std::map<int, SubspanAssignment> by_subspan;
};

struct FinalAssignment {
    Category category = Category::Uncategorized;
    double confidence = 0;  // mode count / entry count
};

// Mode of the subspan categories. Count ties break by larger summed score
// over the tied category's entries, then by category order. Throws
// NoEntries when the trail is empty.
FinalAssignment resolve_final(const ImpermanentAssignment& assignment);

struct PropagationConfig {
    int subspan_months = 6;
    VectorMode vector_mode = VectorMode::Counts;
    bool fixpoint = false;  // feed newly resolved accounts back into V
    int max_rounds = 10;    // fixpoint cap
    double low_confidence_floor = 0.05;
};

struct PropagationOutcome {
    Category category = Category::Uncategorized;
    double confidence = 0;
    ImpermanentAssignment trail;
};

struct PropagationReport {
    std::map<std::string, PropagationOutcome> assigned;   // newly categorized
    std::vector<std::string> still_uncategorized;
    std::size_t subspan_count = 0;
    std::vector<int> skipped_subspans;  // no categorized activity
    int rounds = 1;

    std::string to_json() const;
};

// The whole stage: partition, per-subspan matrices, impermanent assignment,
// mode resolution. Unlabeled accounts never active alongside a known
// hashtag stay Uncategorized.
PropagationReport propagate(const Dataset& dataset, const SeedLabelSet& labels,
                            const PropagationConfig& config = {});

}  // namespace footprint
