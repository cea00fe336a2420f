#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace geotag {

class metrics_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Per-instance multi-label scores over the 0/1 masks. When both masks are
// empty, precision/recall/f1/jaccard are 1; when exactly one is empty, the
// zero-denominator ratios are 0.
struct InstanceScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double hamming_loss = 0.0;
    double jaccard = 0.0;
    double exact_match = 0.0;  // 0 or 1
};

struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double hamming_loss = 0.0;
    double jaccard = 0.0;
    double exact_match = 0.0;
    std::size_t count = 0;
    // label positions per instance when scored over padded model outputs,
    // 0 when instances carried their own (unpadded) lengths
    std::size_t label_length = 0;
};

// Masks must have equal length; the Hamming denominator is that length.
InstanceScores score_instance(const std::vector<std::uint8_t>& y,
                              const std::vector<std::uint8_t>& y_hat);

// Arithmetic mean of every field; empty input is an error.
MetricsReport aggregate(const std::vector<InstanceScores>& scores);

// Column order: precision,recall,f1,hamming_loss,jaccard,exact_match
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);
std::string metrics_table(const MetricsReport& report);

}  // namespace geotag
