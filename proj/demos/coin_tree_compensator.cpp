// Compensator and [M] on a biased coin tree, printed path by path.

#include <iostream>

#include "martlab/compensator.hpp"
#include "martlab/models.hpp"
#include "martlab/quadratic.hpp"

using namespace martlab;

int main() {
  TreeModel tree = binary_tree_space(3, Rational(1, 3));
  ProcessPath a = up_counter(tree);
  ProcessPath b = discrete_compensator(a);
  ProcessPath m = random_walk(tree, 3);
  ProcessPath qv = quadratic_variation(m);

  std::cout << "path  A_k:B_k                M_k:[M]_k\n";
  for (std::size_t w = 0; w < tree.space->size(); ++w) {
    std::cout << tree.space->outcomes()[w] << "  ";
    for (std::size_t k = 0; k < a.size(); ++k) std::cout << " " << a.at(k, w) << ":" << b.at(k, w);
    std::cout << "   ";
    for (std::size_t k = 0; k < m.size(); ++k) std::cout << " " << m.at(k, w) << ":" << qv.at(k, w);
    std::cout << "\n";
  }
  std::cout << "A - B martingale: " << (is_martingale(a - b) ? "yes" : "no") << "\n";
  std::cout << "M^2 - [M] martingale: " << (is_martingale(m * m - qv) ? "yes" : "no") << "\n";
}
