#include <doctest.h>
#include <httplib.h>

#include "spacectl/error.hpp"
#include "support.hpp"

using namespace spacectl;
using namespace spacectl::sim;
using namespace spacectl::testing;

namespace {

BuildingSimulator make_sim() {
  auto alt = fixture_building();
  alt.elevator.current_floor = 5;
  return BuildingSimulator({{"default", fixture_building()}, {"alt", alt}});
}

}  // namespace

TEST_CASE("fixture building loads") {
  const auto s = fixture_building();
  CHECK(s.aircons.at("A305").power == Power::on);
  CHECK(s.aircons.at("A305").setpoint == 24.0);
  CHECK(s.lights.at("A305").power == Power::on);
  CHECK(s.elevator.current_floor == 1);
  CHECK(s.spaces.at("A305").floor == 3);
  CHECK(state_from_json(to_json(s)) == s);
}

TEST_CASE("state schema errors") {
  auto doc = to_json(fixture_building());
  doc["spaces"]["A305"]["ac_ids"].push_back("GHOST");
  CHECK_THROWS_AS(state_from_json(doc), Error);
  doc = to_json(fixture_building());
  doc["lights"]["A305"]["power"] = "dim";
  CHECK_THROWS_AS(state_from_json(doc), Error);
}

TEST_CASE("device requests") {
  auto sim = make_sim();
  const auto before = sim.get_state();

  SUBCASE("aircon off") {
    CHECK(sim.handle("PUT", "/api/airconditioner", R"({"ac_id": "A305", "on_off": "off"})").status == 200);
    auto s = sim.get_state();
    CHECK(s.aircons.at("A305").power == Power::off);
    CHECK(s.aircons.at("A305").setpoint == 24.0);
    s.aircons.at("A305") = before.aircons.at("A305");
    CHECK(s == before);
  }
  SUBCASE("aircon setpoint") {
    CHECK(sim.handle("PUT", "/api/airconditioner", R"({"ac_id": "A306", "setpoint": 21.5})").status == 200);
    CHECK(sim.get_state().aircons.at("A306").setpoint == 21.5);
  }
  SUBCASE("light off") {
    CHECK(sim.handle("PUT", "/api/light", R"({"light_id": "A305", "on_off": "off"})").status == 200);
    CHECK(sim.get_state().lights.at("A305").power == Power::off);
  }
  SUBCASE("elevator") {
    CHECK(sim.handle("PUT", "/api/elevator", R"({"operation": "3fdown"})").status == 200);
    CHECK(sim.get_state().elevator.current_floor == 3);
    CHECK(sim.get_state().elevator.last_operation == "3fdown");
  }
  SUBCASE("light body sent to the aircon endpoint is refused") {
    CHECK(sim.handle("PUT", "/api/airconditioner", R"({"light_id": "A305", "on_off": "off"})").status == 400);
    CHECK(sim.get_state() == before);
  }
  SUBCASE("unknown device") {
    CHECK(sim.handle("PUT", "/api/light", R"({"light_id": "Z999", "on_off": "off"})").status == 404);
  }
  SUBCASE("bad bodies") {
    CHECK(sim.handle("PUT", "/api/light", "{not json").status == 400);
    CHECK(sim.handle("PUT", "/api/light", "[1]").status == 400);
    CHECK(sim.handle("PUT", "/api/light", R"({"light_id": "A305", "on_off": "maybe"})").status == 400);
    CHECK(sim.handle("PUT", "/api/airconditioner", R"({"ac_id": "A305", "setpoint": "hot"})").status == 400);
    CHECK(sim.handle("PUT", "/api/elevator", R"({"operation": "-1fdown"})").status == 400);
    CHECK(sim.handle("PUT", "/api/elevator", R"({"operation": "3fsideways"})").status == 400);
    CHECK(sim.handle("PUT", "/api/elevator", "{}").status == 400);
  }
  SUBCASE("wrong method or path") {
    CHECK(sim.handle("GET", "/api/light", "").status == 405);
    CHECK(sim.handle("POST", "/api/elevator", R"({"operation": "3fdown"})").status == 405);
    CHECK(sim.handle("PUT", "/api/toaster", "{}").status == 404);
  }
  CHECK_FALSE(sim.get_log().empty());
}

TEST_CASE("4xx never mutates state and every request is logged") {
  auto sim = make_sim();
  const auto before = sim.get_state();
  const std::vector<std::tuple<std::string, std::string, std::string>> bad{
      {"PUT", "/api/light", R"({"light_id": "A305", "on_off": "off", "extra": 1})"},
      {"PUT", "/api/airconditioner", R"({"ac_id": "NOPE", "on_off": "off"})"},
      {"DELETE", "/api/airconditioner", R"({"ac_id": "A305", "on_off": "off"})"},
      {"PUT", "/api/elevator", R"({"operation": "99999999999fup"})"},
      {"PUT", "/api/unknown", ""},
  };
  for (const auto& [m, p, b] : bad) {
    const auto r = sim.handle(m, p, b);
    CHECK(r.status >= 400);
    CHECK(r.status < 500);
    CHECK(sim.get_state() == before);
  }
  const auto log = sim.get_log();
  REQUIRE(log.size() == bad.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    CHECK(log[i].seq == i + 1);
    CHECK(log[i].method == std::get<0>(bad[i]));
    CHECK(log[i].path == std::get<1>(bad[i]));
    CHECK(log[i].body == std::get<2>(bad[i]));
  }
  CHECK(sim.get_log(3).size() == 2);
  CHECK(sim.get_log(3).front().seq == 4);
}

TEST_CASE("reset") {
  auto sim = make_sim();
  sim.handle("PUT", "/api/elevator", R"({"operation": "7fup"})");
  sim.reset("alt");
  CHECK(sim.get_state().elevator.current_floor == 5);
  CHECK(sim.get_log().empty());
  sim.handle("PUT", "/api/elevator", R"({"operation": "2fdown"})");
  CHECK(sim.get_log().front().seq == 1);
  sim.reset("default");
  CHECK(sim.get_state() == fixture_building());
  CHECK_THROWS_AS(sim.reset("nope"), Error);
  CHECK(sim.fixture_names() == std::vector<std::string>{"alt", "default"});
  CHECK_THROWS_AS(BuildingSimulator({{"x", fixture_building()}}), Error);
}

TEST_CASE("elevator operation parsing") {
  CHECK(parse_elevator_operation("3fdown") == 3);
  CHECK(parse_elevator_operation("12fup") == 12);
  CHECK(parse_elevator_operation("0fup") == 0);
  CHECK_FALSE(parse_elevator_operation("fup"));
  CHECK_FALSE(parse_elevator_operation("3f"));
  CHECK_FALSE(parse_elevator_operation("3Fdown"));
  CHECK_FALSE(parse_elevator_operation("-2fdown"));
  CHECK_FALSE(parse_elevator_operation("3fdown "));
}

TEST_CASE("http front") {
  auto sim = make_sim();
  SimulatorServer server(sim);
  httplib::Client client("127.0.0.1", server.port());

  auto r = client.Put("/api/light", R"({"light_id": "A305", "on_off": "off"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");

  r = client.Put("/api/toaster", "{}", "application/json");
  REQUIRE(r);
  CHECK(r->status == 404);
  r = client.Patch("/api/light", "{}", "application/json");
  REQUIRE(r);
  CHECK(r->status == 405);

  r = client.Get("/state");
  REQUIRE(r);
  CHECK(state_from_json(nlohmann::json::parse(r->body)) == sim.get_state());

  r = client.Get("/log?since=1");
  REQUIRE(r);
  const auto log = nlohmann::json::parse(r->body);
  REQUIRE(log.size() == 2);
  CHECK(log[0]["path"] == "/api/toaster");
  CHECK(log[1]["method"] == "PATCH");
  r = client.Get("/log?since=-1");
  REQUIRE(r);
  CHECK(r->status == 400);

  r = client.Post("/reset", R"({"fixture": "alt"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(sim.get_state().elevator.current_floor == 5);
  r = client.Post("/reset", R"({"fixture": "missing"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 404);

  r = client.Options("/api/light");
  REQUIRE(r);
  CHECK(r->status == 204);

  CHECK_THROWS_AS(SimulatorServer(sim, "127.0.0.1", server.port()), Error);
}
