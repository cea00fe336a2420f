#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <set>
#include <vector>

// Brute-force scoring oracle built on std::set algebra, independent of the
// counting implementation in geotag::score_instance.
namespace test_support {

struct OracleScores {
    double precision, recall, f1, hamming, jaccard, exact;
};

inline OracleScores oracle_scores(const std::vector<std::uint8_t>& y,
                                  const std::vector<std::uint8_t>& y_hat) {
    std::set<std::size_t> truth, pred;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i]) truth.insert(i);
    for (std::size_t i = 0; i < y_hat.size(); ++i)
        if (y_hat[i]) pred.insert(i);

    std::set<std::size_t> inter, uni, sym;
    std::set_intersection(truth.begin(), truth.end(), pred.begin(), pred.end(),
                          std::inserter(inter, inter.end()));
    std::set_union(truth.begin(), truth.end(), pred.begin(), pred.end(),
                   std::inserter(uni, uni.end()));
    std::set_symmetric_difference(truth.begin(), truth.end(), pred.begin(), pred.end(),
                                  std::inserter(sym, sym.end()));

    OracleScores s{};
    if (truth.empty() && pred.empty()) {
        s.precision = s.recall = s.f1 = s.jaccard = 1.0;
    } else {
        s.precision =
            pred.empty() ? 0.0 : double(inter.size()) / double(pred.size());
        s.recall = truth.empty() ? 0.0 : double(inter.size()) / double(truth.size());
        s.f1 = (s.precision + s.recall) > 0.0
                   ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                   : 0.0;
        s.jaccard = double(inter.size()) / double(uni.size());
    }
    s.hamming = y.empty() ? 0.0 : double(sym.size()) / double(y.size());
    s.exact = truth == pred ? 1.0 : 0.0;
    return s;
}

inline std::vector<std::uint8_t> mask_from_bits(unsigned bits, std::size_t len) {
    std::vector<std::uint8_t> mask(len);
    for (std::size_t i = 0; i < len; ++i) mask[i] = (bits >> i) & 1u;
    return mask;
}

}  // namespace test_support
