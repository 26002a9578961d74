#include <doctest.h>

#include "support.hpp"

using namespace spacectl;
using namespace spacectl::testing;
using json = nlohmann::json;

namespace {

CliRun run(const std::vector<std::string>& args) { return run_cli(args); }

}  // namespace

TEST_CASE("route accepts, executes and exits 0") {
  LiveBuilding live;
  const auto r = run({"--config", live.write_config().string(), "route", "I'm leaving the office"});
  CHECK(r.exit_code == 0);
  const auto doc = json::parse(r.out);
  CHECK(doc["decision"]["api_id"] == "leave_office");
  CHECK(doc["report"]["overall"] == "success");
  CHECK(live.simulator.get_log().size() == 3);
}

TEST_CASE("route rejection exits 3") {
  LiveBuilding live;
  const auto r = run({"--config", live.write_config().string(), "route", "tell me a joke about penguins"});
  CHECK(r.exit_code == 3);
  CHECK(json::parse(r.out)["decision"]["status"] == "rejected");
  CHECK(live.simulator.get_log().empty());
}

TEST_CASE("route dry run and tau override") {
  LiveBuilding live;
  auto r = run({"--config", live.write_config().string(), "--dry-run", "route", "leave office"});
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out)["dry_run"] == true);
  CHECK(live.simulator.get_log().empty());

  r = run({"--config", live.write_config().string(), "--tau", "1.0", "--dry-run", "route", "please leave the office"});
  CHECK(r.exit_code == 3);
}

TEST_CASE("configuration problems exit 1") {
  LiveBuilding live;
  const auto config = live.write_config().string();
  CHECK(run({"--config", config, "route", "   "}).exit_code == 1);
  CHECK(run({"--config", config, "--tau", "0", "route", "leave office"}).exit_code == 1);
  CHECK(run({"--config", "/nonexistent.json", "route", "leave office"}).exit_code == 1);
  CHECK(run({"--config", config, "route"}).exit_code == 1);
  CHECK(run({"bogus"}).exit_code == 1);
}

TEST_CASE("route exits 2 when a call fails") {
  LiveBuilding live;
  auto doc = live.config_json();
  auto registry = read_json(live.registry_path());
  registry[0]["transaction"][0]["endpoint"] = "http://127.0.0.1:" + std::to_string(closed_port()) + "/api/x";
  write_text_file(live.dir / "broken.json", registry.dump());
  doc["registry_path"] = (live.dir / "broken.json").string();
  write_text_file(live.dir / "broken-pipeline.json", doc.dump());
  const auto r = run({"--config", (live.dir / "broken-pipeline.json").string(), "route", "leave office"});
  CHECK(r.exit_code == 2);
  CHECK(json::parse(r.out)["report"]["overall"] == "partial_failure");
}

TEST_CASE("validate") {
  auto r = run({"--config", fixture("pipeline.json").string(), "validate", "--building",
                fixture("building.json").string()});
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out) == json{{"valid", true}, {"problems", 0}, {"apis", 6}, {"exemplars", 36}});

  TempDir dir;
  auto doc = read_json(fixture("pipeline.json"));
  doc["exemplars_path"] = fixture("exemplars.json").string();
  doc["registry_path"] = fixture("registry_verbatim.json").string();
  write_text_file(dir / "p.json", doc.dump());
  r = run({"--config", (dir / "p.json").string(), "validate"});
  CHECK(r.exit_code == 1);
  CHECK(json::parse(r.out)["valid"] == false);
}

TEST_CASE("index build writes a loadable snapshot and model") {
  TempDir dir;
  const auto out = dir / "index.json";
  const auto model = dir / "model.json";
  auto r = run({"--config", fixture("pipeline.json").string(), "index", "build", "--out", out.string(),
                "--model-out", model.string()});
  CHECK(r.exit_code == 0);
  const auto index = load_index(out);
  CHECK(index.size() == 36);
  CHECK(CentroidModel::from_json(read_json(model)).centroids().size() == 6);

  // The snapshot can stand in for the text corpus.
  auto doc = read_json(fixture("pipeline.json"));
  doc["exemplars_path"] = out.string();
  doc["registry_path"] = fixture("registry.json").string();
  write_text_file(dir / "p.json", doc.dump());
  r = run({"--config", (dir / "p.json").string(), "--dry-run", "route", "lights on in A305"});
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out)["decision"]["api_id"] == "lights_on");
}
