#pragma once

#include <vector>

namespace divaug {

/// Softmax output of the oracle for one image: a point on the D-simplex.
using ProbVector = std::vector<double>;

/// Entries non-negative and summing to one within `tolerance`.
bool is_prob_vector(const ProbVector& p, double tolerance = 1e-9);

}  // namespace divaug
