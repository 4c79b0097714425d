#include <gtest/gtest.h>

#include <fstream>

#include "paths.hpp"
#include "proagent/toolset.hpp"

using namespace proagent;
using proagent::testing::data_dir;
using proagent::testing::world_fixture;

namespace {

std::vector<std::string> param_names(const ToolDescriptor& tool) {
  std::vector<std::string> names;
  for (const auto& p : tool.params) names.push_back(p.name);
  return names;
}

}  // namespace

TEST(Registry, DefaultHasTwentyTools) { EXPECT_EQ(registry_default().size(), 20u); }

TEST(Registry, DocumentedParams) {
  const auto& registry = registry_default();
  const auto& weather = registry.lookup("get_city_weather");
  ASSERT_EQ(weather.params.size(), 2u);
  EXPECT_EQ(weather.params[0].name, "city");
  EXPECT_TRUE(weather.params[0].required);
  EXPECT_EQ(weather.params[1].name, "time");
  EXPECT_TRUE(weather.params[1].required);

  EXPECT_TRUE(registry.lookup("get_current_datetime").params.empty());
  EXPECT_EQ(param_names(registry.lookup("book_uber")),
            (std::vector<std::string>{"start", "destination"}));
}

TEST(Registry, EveryDocumentedToolResolves) {
  const std::vector<std::string> names = {
      "get_city_weather",        "get_current_datetime",  "check_agenda_time_conflict",
      "wikipedia_search",        "get_current_gps_coordinates", "get_online_product_price",
      "search_rednote",          "visual_language_model", "google_map",
      "book_uber",               "get_health_data",       "get_medical_knowledge",
      "play_music",              "add_to_agenda",         "check_bus_schedule",
      "google_search",           "set_timer",             "query_stock",
      "add_meeting",             "send_email"};
  ASSERT_EQ(names.size(), 20u);
  for (const auto& name : names) {
    EXPECT_NO_THROW(registry_default().lookup(name)) << name;
  }
}

TEST(Registry, UnknownToolThrows) {
  EXPECT_THROW(registry_default().lookup("no_such_tool"), UnknownTool);
}

TEST(Registry, ShippedConfigMatchesDefault) {
  auto shipped = ToolRegistry::load(data_dir() / "registry.json");
  EXPECT_EQ(shipped, registry_default());
}

TEST(Registry, JsonRoundTrip) {
  auto doc = registry_default().to_json();
  EXPECT_EQ(ToolRegistry::from_json(nlohmann::json::parse(doc.dump())), registry_default());
}

TEST(Registry, RejectsBadConfig) {
  auto dup = nlohmann::json::parse(R"({"tools": [
    {"name": "a", "description": "x"}, {"name": "a", "description": "y"}]})");
  EXPECT_THROW(ToolRegistry::from_json(dup), ConfigError);
  auto no_text = nlohmann::json::parse(R"({"tools": [
    {"name": "a", "description": "x", "output_fields": ["city"]}]})");
  EXPECT_THROW(ToolRegistry::from_json(no_text), ConfigError);
}

TEST(Registry, GpsExposesCity) {
  EXPECT_TRUE(registry_default().lookup("get_current_gps_coordinates").has_output_field("city"));
}

TEST(ValidateArgs, Cases) {
  const auto& weather = registry_default().lookup("get_city_weather");
  EXPECT_TRUE(validate_args(weather, TextArgs{{"city", "x"}, {"time", "y"}}).empty());

  auto missing = validate_args(weather, TextArgs{{"city", "x"}});
  ASSERT_EQ(missing.size(), 1u);
  EXPECT_EQ(missing[0].kind, DiagnosticKind::MissingParam);
  EXPECT_EQ(missing[0].subject, "time");

  auto unknown =
      validate_args(registry_default().lookup("get_current_datetime"), TextArgs{{"foo", "x"}});
  ASSERT_EQ(unknown.size(), 1u);
  EXPECT_EQ(unknown[0].kind, DiagnosticKind::UnknownParam);
  EXPECT_EQ(unknown[0].subject, "foo");
}

class InvokeTest : public ::testing::Test {
 protected:
  WorldFixture fixture = WorldFixture::load(world_fixture());
  const ToolRegistry& registry = registry_default();
};

TEST_F(InvokeTest, GpsReadsFixtureCity) {
  auto result = invoke(registry, fixture, "get_current_gps_coordinates", {});
  EXPECT_EQ(result.fields.at("city"), "Hong Kong");
  EXPECT_FALSE(result.text().empty());
}

TEST_F(InvokeTest, DatetimeEchoesClock) {
  auto result = invoke(registry, fixture, "get_current_datetime", {});
  EXPECT_NE(result.text().find("2025-01-15"), std::string::npos);
  EXPECT_EQ(result.fields.at("date"), "2025-01-15");
  EXPECT_EQ(result.fields.at("time"), "09:00");
}

TEST_F(InvokeTest, WeatherTableLookupIsCaseInsensitive) {
  auto result = invoke(registry, fixture, "get_city_weather",
                       {{"city", " hong kong"}, {"time", "This Weekend"}});
  EXPECT_EQ(result.text(), "Hong Kong this weekend: clear skies, 18-23 C, light breeze.");
}

TEST_F(InvokeTest, CannedResponseKeyedByArgs) {
  auto result = invoke(registry, fixture, "get_health_data", {});
  EXPECT_NE(result.text().find("glucose"), std::string::npos);
}

TEST_F(InvokeTest, DefaultRuleIsOrderInsensitive) {
  auto a = invoke(registry, fixture, "book_uber", {{"start", "Home"}, {"destination", "Airport"}});
  auto b = invoke(registry, fixture, "book_uber", {{"destination", "airport"}, {"start", "home"}});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.text(), "[mock] book_uber(destination=airport, start=home)");
}

TEST_F(InvokeTest, AgendaConflict) {
  auto hit = invoke(registry, fixture, "check_agenda_time_conflict", {{"time", "2025-01-17 15:00"}});
  EXPECT_NE(hit.text().find("Conflict at"), std::string::npos);
  auto miss = invoke(registry, fixture, "check_agenda_time_conflict", {{"time", "2025-01-20 15:00"}});
  EXPECT_NE(miss.text().find("No conflict"), std::string::npos);
}

TEST_F(InvokeTest, Errors) {
  EXPECT_THROW(invoke(registry, fixture, "get_whether", {}), UnknownTool);
  EXPECT_THROW(invoke(registry, fixture, "get_city_weather", {{"city", "x"}}), InvalidArguments);
  EXPECT_THROW(invoke(registry, fixture, "send_email",
                      {{"receiver", "fail@example.com"}, {"subject", "x"}, {"content", "x"}}),
               SimulatedFailure);
  EXPECT_NO_THROW(invoke(registry, fixture, "send_email",
                         {{"receiver", "ok@example.com"}, {"subject", "x"}, {"content", "x"}}));
}

// Determinism and schema conformance over every tool with generated args.
TEST_F(InvokeTest, EveryToolIsDeterministicAndExposesDeclaredFields) {
  for (const auto& tool : registry.tools()) {
    for (int variant = 0; variant < 3; ++variant) {
      TextArgs args;
      for (const auto& p : tool.params) {
        if (p.required || variant == 2) args.emplace_back(p.name, p.name + std::to_string(variant));
      }
      auto first = invoke(registry, fixture, tool.name, args);
      auto second = invoke(registry, fixture, tool.name, args);
      EXPECT_EQ(first, second) << tool.name;
      for (const auto& field : tool.output_fields) {
        EXPECT_TRUE(first.fields.contains(field)) << tool.name << "." << field;
      }
    }
  }
}
