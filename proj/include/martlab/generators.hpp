#pragma once

// Named model generators, addressable from the command line. Each returns a
// complete Model whose declared process kinds hold by construction.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "martlab/model_io.hpp"
#include "martlab/models.hpp"

namespace martlab {

struct GeneratorParams {
  std::size_t depth = 3;
  Rational p_up = Rational(1, 2);
  Rational scale = 1;
  Rational p_jump = Rational(1, 2);
  std::vector<JumpAtom> jump_law{{Rational(1), Rational(1)}};
  std::size_t n_max = 6;
  std::uint64_t seed = 0;
};

inline const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names{"binary_tree", "constant",    "poisson_skeleton", "random_walk",
                                              "randomized",  "single_jump", "stopped_walk",     "up_counter",
                                              "walk"};
  return names;
}

// "v:p,v:p,..." with rational v and p.
inline std::vector<JumpAtom> parse_jump_law(const std::string& text) {
  std::vector<JumpAtom> law;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(pos, end - pos);
    std::size_t colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("jump_law", "expected value:prob pairs, got '" + item + "'");
    try {
      law.push_back({parse_rational(item.substr(0, colon)), parse_rational(item.substr(colon + 1))});
    } catch (const ValidationError& e) {
      throw ValidationError("jump_law", e.what());
    }
    pos = end + 1;
  }
  return law;
}

namespace gen {

inline StoppingTime first_down(const TreeModel& tree) {
  ProcessPath downs = signed_walk(tree, 0, 1);
  return StoppingTime::first_time(downs, [](std::size_t, const Rational& v) { return v > 0; });
}

inline Model from_tree(const TreeModel& tree) {
  Model m;
  m.space = tree.space;
  m.filtration = tree.filtration;
  return m;
}

}  // namespace gen

inline Model generate_model(const std::string& name, const GeneratorParams& p) {
  Model m;
  Json params = Json::object();
  if (name == "binary_tree" || name == "random_walk") {
    TreeModel tree = binary_tree_space(p.depth, p.p_up);
    m = gen::from_tree(tree);
    params = {{"depth", p.depth}, {"p_up", to_string(p.p_up)}};
    if (name == "binary_tree") {
      m.processes.push_back({"U", "increasing", up_counter(tree)});
      m.processes.push_back({"M", "martingale", random_walk(tree, 1)});
    } else {
      params["scale"] = to_string(p.scale);
      m.processes.push_back({"M", "martingale", random_walk(tree, p.scale)});
    }
    m.stopping_times.push_back({"first_down", gen::first_down(tree)});
  } else if (name == "poisson_skeleton") {
    PoissonSkeleton ps = poisson_skeleton(p.depth, p.p_jump, p.jump_law);
    m = gen::from_tree(ps.tree);
    Json law = Json::array();
    for (const auto& a : p.jump_law) law.push_back({to_string(a.value), to_string(a.prob)});
    params = {{"depth", p.depth}, {"p_jump", to_string(p.p_jump)}, {"jump_law", law}};
    m.processes.push_back({"A", "increasing", ps.jumps});
    m.processes.push_back({"B", "predictable", ps.compensator});
    m.processes.push_back({"M", "martingale", ps.jumps - ps.compensator});
  } else if (name == "randomized") {
    RandomInstance inst = randomized_instance(p.seed);
    m.space = inst.filtration->space();
    m.filtration = inst.filtration;
    params = {{"seed", p.seed}};
    m.processes.push_back({"A", "increasing", inst.increasing});
    m.processes.push_back({"H", "predictable", inst.predictable});
    m.processes.push_back({"M", "martingale", inst.martingale});
    m.processes.push_back({"X", "adapted", inst.adapted});
    Xorshift64 rng(p.seed ^ 0x5bd1e995ULL);
    m.stopping_times.push_back({"T", random_stopping_time(rng, inst.filtration, true)});
  } else if (name == "single_jump" || name == "up_counter" || name == "walk" || name == "stopped_walk" ||
             name == "constant") {
    DyadicFixture fx = dyadic_fixture(name, p.n_max);
    m.space = fx.filtration->space();
    m.filtration = fx.filtration;
    params = {{"n_max", p.n_max}};
    if (name == "constant") {
      // Constant paths are both increasing and martingales; declare each role once.
      m.processes.push_back({"C", "increasing", fx.process});
      m.processes.push_back({"K", "martingale", fx.process});
    } else {
      bool increasing = name == "single_jump" || name == "up_counter";
      m.processes.push_back({increasing ? "A" : "M", increasing ? "increasing" : "martingale", fx.process});
    }
    m.stopping_times.push_back({"S", fx.stopping_times.front()});
  } else {
    throw ValidationError("generator", "unknown generator '" + name + "'");
  }
  m.meta = {{"generator", name}, {"params", params}};
  return m;
}

}  // namespace martlab
