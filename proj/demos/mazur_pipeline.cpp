// Dyadic compensator pipeline on the single-jump fixture.

#include <cstdio>
#include <iostream>

#include "martlab/models.hpp"
#include "martlab/refinement.hpp"

using namespace martlab;

int main(int argc, char** argv) {
  std::size_t n_max = argc > 1 ? std::stoul(argv[1]) : 6;
  DyadicFixture fx = dyadic_fixture("single_jump", n_max);
  ConvergenceTable t = compensator_pipeline(fx.process, {0, n_max}, 4);
  std::cout << "level  sup|C-B|  |C_inf-B_inf|  alpha\n";
  for (const auto& r : t.rows) {
    std::printf("%5zu  %-8s  %-13s  %.6g\n", r.level, to_string(r.sup_error).c_str(),
                to_string(r.terminal_error).c_str(), r.alpha);
  }
  auto rep = limsup_at_stopping_time_check(fx.process, fx.stopping_times.front(), {0, n_max});
  std::cout << "limsup at S: " << (rep ? "pass" : "fail") << " (" << rep.detail << ")\n";
  return t.passed() && rep ? 0 : 1;
}
