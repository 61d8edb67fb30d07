#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "threadweave/diff.hpp"

namespace tw {

struct GradCheckGroup {
  std::string name;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  int checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double max_rel_err = 0.0;
  double tol = 0.0;
  bool passed = false;

  std::string to_string() const;
};

// Central-difference check of every scalar in every parameter group against
// the tape gradient. build_loss must construct the loss on the given tape and
// be deterministic; two identical evaluations that disagree bitwise raise.
// Relative error uses max(|analytic|, |numeric|, 1e-6) as denominator, which
// treats differences below finite-difference resolution as matches.
GradCheckReport grad_check(const std::function<Value(Tape&)>& build_loss,
                           std::span<Parameter* const> params, double h = 1e-5,
                           double tol = 1e-4);

}  // namespace tw
