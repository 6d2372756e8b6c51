#pragma once

#include <cstdint>

#include "mtgcd/core/errors.hpp"
#include "mtgcd/core/grid.hpp"

namespace mtgcd::metrics {

// Foreground = changed class. Counts merge by fieldwise addition, so tiles
// can be scored independently and combined.
struct ConfusionCounts {
    int64_t tp = 0;
    int64_t fp = 0;
    int64_t fn = 0;
    int64_t tn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
    int64_t total() const { return tp + fp + fn + tn; }
};

inline ConfusionCounts accumulate(const Grid<uint8_t>& pred, const Grid<uint8_t>& gt,
                                  const Grid<uint8_t>* ignore = nullptr) {
    if (pred.height() != gt.height() || pred.width() != gt.width())
        throw MetricError("prediction and ground truth shapes differ");
    if (ignore && (ignore->height() != gt.height() || ignore->width() != gt.width()))
        throw MetricError("ignore mask shape differs");
    ConfusionCounts c;
    for (int r = 0; r < gt.height(); ++r) {
        for (int col = 0; col < gt.width(); ++col) {
            if (ignore && (*ignore)(r, col)) continue;
            const bool p = pred(r, col) != 0;
            const bool g = gt(r, col) != 0;
            if (p && g)
                ++c.tp;
            else if (p && !g)
                ++c.fp;
            else if (!p && g)
                ++c.fn;
            else
                ++c.tn;
        }
    }
    return c;
}

struct MetricSummary {
    double iou = 0.0;
    double f1 = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    bool degenerate = false; // some ratio hit 0/0 and was reported as 0
};

inline MetricSummary summarize(const ConfusionCounts& c) {
    MetricSummary s;
    auto ratio = [&s](int64_t num, int64_t den) {
        if (den == 0) {
            s.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    s.iou = ratio(c.tp, c.tp + c.fp + c.fn);
    s.precision = ratio(c.tp, c.tp + c.fp);
    s.recall = ratio(c.tp, c.tp + c.fn);
    if (s.precision + s.recall == 0.0) {
        s.degenerate = true;
        s.f1 = 0.0;
    } else {
        s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    }
    return s;
}

} // namespace mtgcd::metrics
