#pragma once

#include <vector>

#include "nexc/linalg.hpp"

namespace nexc {

// Maximum-score one-to-one assignment on a rectangular score matrix
// (Hungarian algorithm with potentials, O(n^2 m)). Returns row -> column,
// -1 for unassigned rows when rows > cols.
std::vector<int> max_score_assignment(const Matrix& scores);

} // namespace nexc
