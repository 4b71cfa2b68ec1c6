#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace dynbc::detail {

struct CgOutcome {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> history;
};

/// Plain conjugate gradients on an SPD operator. `Vec` needs +=, -=, and
/// scalar * Vec; the inner product comes from `dot`.
template <class Vec, class Apply, class Dot>
CgOutcome conjugate_gradient(const Apply& apply, const Vec& b, Vec& x, const Dot& dot, double tol,
                             int max_iter) {
  CgOutcome out;
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) {
    out.converged = true;
    return out;
  }
  Vec r = b;
  if (dot(x, x) != 0.0) {
    Vec ax = apply(x);
    r -= ax;
  }
  Vec p = r;
  double rr = dot(r, r);
  out.history.push_back(std::sqrt(rr) / b_norm);
  if (out.history.back() <= tol) {
    out.converged = true;
    out.residual = out.history.back();
    return out;
  }
  for (int k = 0; k < max_iter; ++k) {
    Vec ap = apply(p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;  // lost positivity; report as stagnation
    const double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double rr_new = dot(r, r);
    out.iterations = k + 1;
    out.residual = std::sqrt(rr_new) / b_norm;
    out.history.push_back(out.residual);
    if (out.residual <= tol) {
      out.converged = true;
      return out;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return out;
}

}  // namespace dynbc::detail
