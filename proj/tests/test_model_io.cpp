#include <catch2/catch_amalgamated.hpp>

#include "martlab/generators.hpp"
#include "martlab/model_io.hpp"

using namespace martlab;

namespace {

// Field named by the ValidationError thrown while loading `doc`.
std::string error_field(const Json& doc) {
  try {
    model_from_json(doc);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "<no error>";
}

Json small_doc() {
  GeneratorParams p;
  p.depth = 2;
  return model_to_json(generate_model("binary_tree", p));
}

}  // namespace

TEST_CASE("model round trip is lossless", "[io]") {
  GeneratorParams p;
  p.depth = 3;
  p.seed = 9;
  for (const auto& name : generator_names()) {
    INFO(name);
    Model m = generate_model(name, p);
    std::string text = dump_model(m);
    Model back = parse_model(text);
    CHECK(*back.space == *m.space);
    CHECK(*back.filtration == *m.filtration);
    REQUIRE(back.processes.size() == m.processes.size());
    for (std::size_t i = 0; i < m.processes.size(); ++i) {
      CHECK(back.processes[i].name == m.processes[i].name);
      CHECK(back.processes[i].kind == m.processes[i].kind);
      CHECK(back.processes[i].path == m.processes[i].path);
    }
    REQUIRE(back.stopping_times.size() == m.stopping_times.size());
    for (std::size_t i = 0; i < m.stopping_times.size(); ++i)
      CHECK(back.stopping_times[i].time.indices() == m.stopping_times[i].time.indices());
    CHECK(back.meta == m.meta);
    CHECK(dump_model(back) == text);
  }
}

TEST_CASE("rationals are written as p/q", "[io]") {
  Json doc = small_doc();
  CHECK(doc["version"] == 1);
  CHECK(doc["space"]["probs"][0] == "1/4");
  CHECK(doc["filtration"]["times"][1] == "1/1");
  CHECK(doc["processes"][0]["values"][0][0] == "0/1");
}

TEST_CASE("integers and infinite stopping times are accepted", "[io]") {
  Json doc = small_doc();
  doc["space"]["probs"] = {"1/4", "1/4", "1/4", "1/4"};
  doc["filtration"]["times"] = {0, 1, 2};
  doc["stopping_times"] = Json::array({{{"name", "never"}, {"values", {nullptr, nullptr, nullptr, nullptr}}}});
  Model m = model_from_json(doc);
  CHECK(m.filtration->times()[2] == 2);
  CHECK_FALSE(m.stopping_times[0].time.is_finite());
  CHECK(model_to_json(m)["stopping_times"][0]["values"][0].is_null());
}

TEST_CASE("validation errors name the offending field", "[io]") {
  SECTION("version") {
    Json doc = small_doc();
    doc["version"] = 2;
    CHECK(error_field(doc) == "version");
    doc.erase("version");
    CHECK(error_field(doc) == "version");
  }
  SECTION("probabilities") {
    Json doc = small_doc();
    doc["space"]["probs"][3] = "1/2";
    CHECK(error_field(doc).rfind("space", 0) == 0);
    doc["space"]["probs"][3] = "abc";
    CHECK(error_field(doc) == "space.probs[3]");
    doc["space"]["probs"][3] = 0.25;
    CHECK(error_field(doc) == "space.probs[3]");
  }
  SECTION("missing members") {
    Json doc = small_doc();
    doc["space"].erase("outcomes");
    CHECK(error_field(doc) == "space.outcomes");
    Json d2 = small_doc();
    d2.erase("filtration");
    CHECK(error_field(d2) == "filtration");
  }
  SECTION("partitions") {
    Json doc = small_doc();
    doc["filtration"]["partitions"][1] = {{0, 1}, {1, 2, 3}};
    CHECK(error_field(doc).rfind("filtration.partitions[1]", 0) == 0);
    Json d2 = small_doc();
    doc = small_doc();
    // F_2 coarser than F_1: not a filtration.
    doc["filtration"]["partitions"][2] = {{0, 1, 2, 3}};
    CHECK(error_field(doc).rfind("filtration", 0) == 0);
    d2["filtration"]["partitions"][1][0][0] = -1;
    CHECK(error_field(d2) == "filtration.partitions[1][0][0]");
  }
  SECTION("processes") {
    Json doc = small_doc();
    doc["processes"][0]["values"][2][1] = "1/0";
    CHECK(error_field(doc) == "processes[0].values[2][1]");
    doc = small_doc();
    doc["processes"][0]["kind"] = "submartingale";
    CHECK(error_field(doc) == "processes[0].kind");
    doc = small_doc();
    doc["processes"][1]["name"] = doc["processes"][0]["name"];
    CHECK(error_field(doc) == "processes[1].name");
    doc = small_doc();
    doc["processes"][0]["values"].erase(1);
    CHECK(error_field(doc).rfind("processes[0]", 0) == 0);
  }
  SECTION("stopping times") {
    Json doc = small_doc();
    doc["stopping_times"][0]["values"][0] = "x";
    CHECK(error_field(doc) == "stopping_times[0].values[0]");
    doc = small_doc();
    // Stop at time 1 on a single outcome: not decidable from F_1.
    doc["stopping_times"][0]["values"] = {1, 2, 2, 2};
    CHECK(error_field(doc).rfind("stopping_times[0]", 0) == 0);
  }
}

TEST_CASE("syntax errors report a line", "[io]") {
  try {
    parse_model("{\n  \"version\": 1,\n  \"space\": {\n    \"outcomes\": [\"a\"\n");
    FAIL("no error");
  } catch (const ValidationError& e) {
    CHECK(e.field().rfind("line ", 0) == 0);
  }
  CHECK_THROWS_AS(parse_model("[]"), ValidationError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ValidationError);
}
