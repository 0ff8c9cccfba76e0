#pragma once

#include <vector>

#include "sift/tape.hpp"

namespace sift::ad {

// Elementwise (shapes must match exactly).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
// a*x + b with scalar coefficients.
Var axpb(const Var& x, double a, double b);

// matmul covers {m,k}x{k,n}, {k}x{k,n} -> {n}, and {m,k}x{k} -> {m}.
Var matmul(const Var& a, const Var& b);
// M{t,d} + r{d} broadcast over rows.
Var add_rowwise(const Var& m, const Var& r);
Var dot(const Var& a, const Var& b);  // rank-1, returns scalar

// Shape plumbing (rank-1 unless noted).
Var concat(const std::vector<Var>& parts);
Var slice(const Var& v, std::size_t start, std::size_t len);
Var row(const Var& m, std::size_t i);  // {t,d} -> {d} view of row i
Var stack_rows(const std::vector<Var>& rows);  // t vectors {d} -> {t,d}
Var mean_rows(const Var& m);                   // {t,d} -> {d}
Var mean_all(const Var& x);                    // any -> scalar
Var sum_all(const Var& x);                     // any -> scalar

// Pointwise nonlinearities.
Var sigmoid(const Var& x);
Var tanh(const Var& x);
Var log(const Var& x);
Var exp(const Var& x);
Var abs(const Var& x);

// Row-stabilized softmax; rank-1 input treated as a single row.
// Throws numeric_error on non-finite input.
Var softmax_rows(const Var& x);
Var log_softmax_rows(const Var& x);

// Mean negative log-likelihood over rows of logits {m,c} (or {c} with one
// target). Gradient is (softmax - one_hot)/m, computed in closed form.
Var cross_entropy_logits(const Var& logits, const std::vector<std::size_t>& targets);

// Columnwise max over rows of {t,d} -> {d}; ties route the gradient to the
// earliest row.
Var max_over_time(const Var& m);

// Fused cosine similarity of two rank-1 vectors; norms are guarded with a
// small epsilon and an exactly-zero vector yields zero gradient.
Var cosine_similarity(const Var& a, const Var& b);

// E{V,d} row lookup; backward scatter-adds into the table rows.
Var embedding_row(const Var& e, std::size_t id);
Var embedding_gather(const Var& e, const std::vector<std::size_t>& ids);  // {T,d}

// Sliding windows for width-w convolutions: {t,d} -> {t-w+1, w*d}.
Var time_patches(const Var& m, std::size_t w);
// Appends zero rows: {t,d} -> {new_t, d}, new_t >= t.
Var pad_rows(const Var& m, std::size_t new_t);

// Forward: one_hot(argmax(y)) over rank-1 y (first index on ties).
// Backward: identity, i.e. the gradient flows through unchanged.
Var straight_through(const Var& y);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }

}  // namespace sift::ad
