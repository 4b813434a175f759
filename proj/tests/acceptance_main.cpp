#include "qcgeom/acceptance.hpp"

#include <cstdio>

int main() {
  const auto results = qcgeom::run_acceptance({}, [](const qcgeom::CriterionResult& r) {
    std::printf("%s\n", qcgeom::format_result(r).c_str());
    std::fflush(stdout);
  });
  for (const auto& r : results)
    if (!r.pass) return 1;
  return 0;
}
