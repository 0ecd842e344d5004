// Copyright (C) 2026 The ragbench Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "pipeline/types.hpp"

namespace ragbench::ref {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_l2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// dot / sqrt(|a|^2 |b|^2). Bitwise-identical inputs give exactly 1.0 since
// sqrt(x * x) == x in IEEE arithmetic.
inline double cosine_from(double ab, double aa, double bb) {
    if (aa <= 0.0 || bb <= 0.0) return 0.0;
    return ab / std::sqrt(aa * bb);
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
    return cosine_from(dot(a, b), dot(a, a), dot(b, b));
}

// Higher is better under both metrics.
inline double similarity(Metric metric, std::span<const double> q, double qq, std::span<const double> x, double xx) {
    if (metric == Metric::kCosine) return cosine_from(dot(q, x), qq, xx);
    return -squared_l2(q, x);
}

// Ranking order: higher score first, ties by ascending id.
inline bool ranks_before(const RetrievalCandidate& a, const RetrievalCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

}  // namespace ragbench::ref
