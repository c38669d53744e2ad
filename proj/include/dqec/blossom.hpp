#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace dqec {

// Maximum-weight matching on a dense graph (blossom algorithm, O(n^3)).
// Vertices are 0-indexed; absent edges have weight 0 and are never matched.
class BlossomMatcher {
public:
    explicit BlossomMatcher(int n);
    ~BlossomMatcher();

    void set_weight(int u, int v, long long w); // w > 0

    // mate[u] = matched partner or -1
    std::vector<int> solve_maximum();

private:
    class Impl;
    std::unique_ptr<Impl> impl_;
    int n_;
};

// Exact minimum-weight perfect matching on the complete graph over n nodes
// with nonnegative integer weights. Throws when n is odd.
std::vector<std::pair<int, int>> minimum_weight_perfect_matching(
    int n, const std::function<long long(int, int)>& weight);

} // namespace dqec
