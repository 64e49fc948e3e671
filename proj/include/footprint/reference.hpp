#pragma once

#include <string>
#include <utility>
#include <vector>

#include "footprint/classifiers.hpp"
#include "footprint/propagation.hpp"

namespace footprint::reference {

// Serial, brute-force counterparts of the parallel kernels. They share the
// impurity and similarity definitions with the fast paths but nothing else:
// dense vectors instead of sparse merge-joins, fresh per-threshold counting
// instead of incremental sweeps, plain recursion instead of an explicit node
// stack. Tests pin the fast paths against these; the bench target times the
// gap.

// Densifies one sparse column over the full vocabulary.
std::vector<double> dense_vector(const SparseHashtagVector& column, std::size_t dimensions);

// Cosine over dense vectors, clamped to [0, 1]. Throws ZeroVector when
// either norm is zero.
double cosine_dense(const std::vector<double>& a, const std::vector<double>& b);

// All-pairs serial version of assign_impermanent: same inputs, same output
// order, same tie-breaking.
std::vector<std::pair<std::string, SubspanAssignment>> assign_impermanent(
    const SimilarityMatrices& matrices, double low_confidence_floor = 0.05);

// Explicit mode computation: collect counts, find the modal categories, break
// ties by summed score then by category order.
FinalAssignment resolve_final(const ImpermanentAssignment& assignment);

// Exhaustive recursive split search over every feature and every midpoint
// threshold. Only defined for the full feature set (features_per_split equal
// to the feature count); throws InvalidConfig otherwise.
Tree train_tree(const std::vector<LabeledSample>& samples, const TrainConfig& config);

// Structural equality of two trees (layout, split parameters, leaf counts).
bool trees_equal(const Tree& a, const Tree& b);

}  // namespace footprint::reference
