#pragma once

#include "smart/dataset.hpp"
#include "smart/predicate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace smart {

struct SplitConstraints {
    std::size_t min_group_size = 10;
    std::size_t max_group_size = SIZE_MAX;
    int max_depth = 3;

    void validate() const;
};

// Finds the predicate over the given (numeric or boolean) feature columns
// whose slice-vs-complement gap in mean correctness is largest subject to the
// group-size constraints. Candidates are every root-to-node path of a
// variance-reduction decision tree plus every single-condition split, so at
// max_depth 1 the search is exhaustive over candidate thresholds. Ties break
// to the smaller depth, then the lexicographically smaller rendering.
PredicatePtr optimal_split_query(const Dataset& dataset,
                                 const std::vector<std::uint8_t>& correctness,
                                 const std::vector<std::string>& features,
                                 const SplitConstraints& constraints);

// Enumerates category subsets up to max_subset_size and returns the in-set
// predicate with the largest constrained gap. candidates_considered, when
// given, receives the number of enumerated subsets.
PredicatePtr optimal_categorical_split(const Dataset& dataset,
                                       const std::vector<std::uint8_t>& correctness,
                                       const std::string& feature,
                                       const SplitConstraints& constraints,
                                       std::size_t max_subset_size = 3,
                                       std::size_t* candidates_considered = nullptr);

// Achieved |gap| of a predicate under the same objective (test helper and CLI
// reporting).
double split_gap(const Dataset& dataset, const std::vector<std::uint8_t>& correctness,
                 const PredicatePtr& predicate);

} // namespace smart
