#include "threadweave/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "threadweave/errors.hpp"

namespace tw {

std::string GradCheckReport::to_string() const {
  std::string out;
  char buf[160];
  for (const auto& g : groups) {
    std::snprintf(buf, sizeof(buf), "%-28s n=%-5d max_rel_err=%.3e max_abs_err=%.3e\n",
                  g.name.c_str(), g.checked, g.max_rel_err, g.max_abs_err);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "overall max_rel_err=%.3e tol=%.1e => %s\n", max_rel_err, tol,
                passed ? "PASS" : "FAIL");
  out += buf;
  return out;
}

GradCheckReport grad_check(const std::function<Value(Tape&)>& build_loss,
                           std::span<Parameter* const> params, double h, double tol) {
  auto eval = [&]() -> double {
    Tape tape;
    return build_loss(tape).scalar();
  };

  const double base0 = eval();
  const double base1 = eval();
  if (base0 != base1)
    throw NumericError("grad_check: loss closure is not deterministic");

  // Analytic pass.
  std::vector<Tensor> analytic;
  {
    for (Parameter* p : params) p->zero_grad();
    Tape tape;
    Value loss = build_loss(tape);
    tape.backward(loss);
    for (Parameter* p : params) analytic.push_back(p->grad);
    for (Parameter* p : params) p->zero_grad();
  }

  GradCheckReport report;
  report.tol = tol;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    GradCheckGroup group;
    group.name = p.name;
    for (int j = 0; j < p.value.size(); ++j) {
      const double orig = p.value.a[j];
      p.value.a[j] = orig + h;
      const double fp = eval();
      p.value.a[j] = orig - h;
      const double fm = eval();
      p.value.a[j] = orig;
      const double num = (fp - fm) / (2.0 * h);
      const double ana = analytic[pi].a[j];
      const double abs_err = std::abs(ana - num);
      const double rel = abs_err / std::max({std::abs(ana), std::abs(num), 1e-6});
      group.max_abs_err = std::max(group.max_abs_err, abs_err);
      group.max_rel_err = std::max(group.max_rel_err, rel);
      ++group.checked;
    }
    report.max_rel_err = std::max(report.max_rel_err, group.max_rel_err);
    report.groups.push_back(std::move(group));
  }
  report.passed = report.max_rel_err < tol;
  return report;
}

}  // namespace tw
