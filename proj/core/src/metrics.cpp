#include "geotag/metrics.hpp"

#include <cstdio>
#include <sstream>

namespace geotag {

InstanceScores score_instance(const std::vector<std::uint8_t>& y,
                              const std::vector<std::uint8_t>& y_hat) {
    if (y.size() != y_hat.size())
        throw metrics_error("score_instance: mask lengths differ (" + std::to_string(y.size()) +
                            " vs " + std::to_string(y_hat.size()) + ")");

    std::size_t true_count = 0, pred_count = 0, both = 0, mismatch = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const bool t = y[i] != 0;
        const bool p = y_hat[i] != 0;
        true_count += t;
        pred_count += p;
        both += t && p;
        mismatch += t != p;
    }
    const std::size_t either = true_count + pred_count - both;

    InstanceScores s;
    if (true_count == 0 && pred_count == 0) {
        s.precision = s.recall = s.f1 = s.jaccard = 1.0;
    } else {
        s.precision = pred_count ? static_cast<double>(both) / static_cast<double>(pred_count) : 0.0;
        s.recall = true_count ? static_cast<double>(both) / static_cast<double>(true_count) : 0.0;
        s.f1 = (s.precision + s.recall) > 0.0
                   ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                   : 0.0;
        s.jaccard = static_cast<double>(both) / static_cast<double>(either);
    }
    s.hamming_loss =
        y.empty() ? 0.0 : static_cast<double>(mismatch) / static_cast<double>(y.size());
    s.exact_match = mismatch == 0 ? 1.0 : 0.0;
    return s;
}

MetricsReport aggregate(const std::vector<InstanceScores>& scores) {
    if (scores.empty()) throw metrics_error("aggregate: no instances");
    MetricsReport report;
    for (const auto& s : scores) {
        report.precision += s.precision;
        report.recall += s.recall;
        report.f1 += s.f1;
        report.hamming_loss += s.hamming_loss;
        report.jaccard += s.jaccard;
        report.exact_match += s.exact_match;
    }
    const double n = static_cast<double>(scores.size());
    report.precision /= n;
    report.recall /= n;
    report.f1 /= n;
    report.hamming_loss /= n;
    report.jaccard /= n;
    report.exact_match /= n;
    report.count = scores.size();
    return report;
}

std::string metrics_csv_header() {
    return "precision,recall,f1,hamming_loss,jaccard,exact_match";
}

std::string metrics_csv_row(const MetricsReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", r.precision, r.recall, r.f1,
                  r.hamming_loss, r.jaccard, r.exact_match);
    return buf;
}

std::string metrics_table(const MetricsReport& r) {
    std::ostringstream os;
    char buf[256];
    os << "Precision  Recall  F1-score  Hamming loss  Jaccard  Exact match\n";
    std::snprintf(buf, sizeof(buf), "%9.3f  %6.3f  %8.3f  %12.4f  %7.3f  %11.3f\n", r.precision,
                  r.recall, r.f1, r.hamming_loss, r.jaccard, r.exact_match);
    os << buf;
    os << "instances: " << r.count;
    if (r.label_length > 0) os << "  (scored over padded length " << r.label_length << ")";
    os << '\n';
    return os.str();
}

}  // namespace geotag
