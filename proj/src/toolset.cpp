#include "proagent/toolset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "proagent/core.hpp"

namespace proagent {

using nlohmann::json;
using nlohmann::ordered_json;

const ParamSpec* ToolDescriptor::find_param(std::string_view param) const noexcept {
  for (const auto& spec : params) {
    if (spec.name == param) return &spec;
  }
  return nullptr;
}

bool ToolDescriptor::has_output_field(std::string_view field) const noexcept {
  return std::find(output_fields.begin(), output_fields.end(), field) != output_fields.end();
}

ToolRegistry::ToolRegistry(std::vector<ToolDescriptor> tools) : tools_(std::move(tools)) {
  for (std::size_t i = 0; i < tools_.size(); ++i) {
    const auto& tool = tools_[i];
    if (!is_identifier(tool.name)) {
      throw ConfigError("tool name '" + tool.name + "' is not an identifier");
    }
    if (!index_.emplace(tool.name, i).second) {
      throw ConfigError("duplicate tool '" + tool.name + "'");
    }
    std::set<std::string_view> params;
    for (const auto& spec : tool.params) {
      if (!is_identifier(spec.name) || !params.insert(spec.name).second) {
        throw ConfigError("tool '" + tool.name + "' has an invalid or duplicate param '" +
                          spec.name + "'");
      }
    }
    if (!tool.has_output_field("text")) {
      throw ConfigError("tool '" + tool.name + "' must declare the output field 'text'");
    }
    for (const auto& field : tool.output_fields) {
      if (!is_identifier(field)) {
        throw ConfigError("tool '" + tool.name + "' output field '" + field +
                          "' is not an identifier");
      }
    }
  }
}

const ToolDescriptor* ToolRegistry::find(std::string_view name) const noexcept {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &tools_[it->second];
}

const ToolDescriptor& ToolRegistry::lookup(std::string_view name) const {
  if (const auto* tool = find(name)) return *tool;
  throw UnknownTool("unknown tool '" + std::string(name) + "'");
}

ordered_json ToolRegistry::to_json() const {
  ordered_json tools = ordered_json::array();
  for (const auto& tool : tools_) {
    ordered_json params = ordered_json::array();
    for (const auto& spec : tool.params) {
      params.push_back({{"name", spec.name},
                        {"description", spec.description},
                        {"required", spec.required}});
    }
    tools.push_back({{"name", tool.name},
                     {"display_name", tool.display_name},
                     {"description", tool.description},
                     {"params", params},
                     {"output", tool.output_description},
                     {"output_fields", tool.output_fields}});
  }
  return ordered_json{{"tools", tools}};
}

ToolRegistry ToolRegistry::from_json(const json& config) {
  try {
    std::vector<ToolDescriptor> tools;
    for (const auto& entry : config.at("tools")) {
      ToolDescriptor tool;
      tool.name = entry.at("name").get<std::string>();
      tool.display_name = entry.value("display_name", tool.name);
      tool.description = entry.at("description").get<std::string>();
      for (const auto& param : entry.value("params", json::array())) {
        tool.params.push_back({param.at("name").get<std::string>(),
                               param.value("description", std::string{}),
                               param.value("required", true)});
      }
      tool.output_description = entry.value("output", std::string{});
      tool.output_fields =
          entry.value("output_fields", std::vector<std::string>{std::string("text")});
      tools.push_back(std::move(tool));
    }
    return ToolRegistry(std::move(tools));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("registry config: ") + e.what());
  }
}

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ToolDescriptor make_tool(std::string name, std::string display_name, std::string description,
                         std::vector<ParamSpec> params, std::string output,
                         std::vector<std::string> fields = {"text"}) {
  return {std::move(name),   std::move(display_name), std::move(description),
          std::move(params), std::move(output),       std::move(fields)};
}

std::vector<ToolDescriptor> default_tools() {
  return {
      make_tool("get_city_weather", "GetCityWeather",
                "Get the weather for a specified city at a given time.",
                {{"city", "The city to fetch weather for.", true},
                 {"time", "The time to fetch weather for.", true}},
                "Weather condition for a specified city at a given time."),
      make_tool("get_current_datetime", "DateTime", "Get the current date and time.", {},
                "Current date and time.", {"text", "date", "time"}),
      // `time` is optional: verified samples call this tool without params.
      make_tool("check_agenda_time_conflict", "CheckAgendaTimeConflict",
                "Check if there is a time conflict in the user's agenda for a given datetime "
                "and return all events as a summarized string.",
                {{"time", "The time to check for conflicts.", false}},
                "A summary of all events and whether there is a conflict."),
      make_tool("wikipedia_search", "WikipediaSearch", "Search on Wikipedia.",
                {{"query", "Search query.", true}}, "Wikipedia search result."),
      make_tool("get_current_gps_coordinates", "GetCurrentGPS",
                "Get the current GPS coordinates of the user.", {},
                "GPS coordinates of the user.", {"text", "city", "latitude", "longitude"}),
      make_tool("get_online_product_price", "GetOnlineProductPrice",
                "Get the price of a product from an online store.",
                {{"product", "The name of the product to search for.", true}},
                "The price of the product as a string."),
      make_tool("search_rednote", "SearchRednote",
                "A platform where people share tips on travel, fitness, cooking, and more, "
                "allowing users to search for relevant strategies.",
                {{"query", "The search query.", true}}, "The search results from rednote."),
      make_tool("visual_language_model", "VisualLanguageModel",
                "Visual Language Model that can answer the user's questions based on the "
                "given image.",
                {{"image", "Any image.", true},
                 {"prompt", "The prompt containing the user's question.", true}},
                "The response from the VLLM."),
      make_tool("google_map", "GoogleMap",
                "Get the route and distance from the current location to the destination "
                "using Google Maps API.",
                {{"start", "The starting location.", true},
                 {"destination", "The destination location.", true}},
                "The route and distance information."),
      make_tool("book_uber", "BookUber",
                "Book an Uber ride from the current location to the destination.",
                {{"start", "The starting location.", true},
                 {"destination", "The destination location.", true}},
                "The Uber ride booking confirmation."),
      make_tool("get_health_data", "GetHealthData",
                "Get health data from the user's smart device.", {},
                "The health data as a string."),
      make_tool("get_medical_knowledge", "GetMedicalKnowledge",
                "Get medical expert knowledge from the up-to-date medical knowledge database.",
                {{"query", "The query string containing the medical topic or symptoms.", true}},
                "The medical expert knowledge as a string."),
      make_tool("play_music", "PlayMusic", "Play a song from the user's music library.", {},
                "The song playing confirmation."),
      make_tool("add_to_agenda", "AddtoAgenda", "Add an event to the user's agenda.",
                {{"event", "The name of the event to add.", true},
                 {"time", "The time of the event.", true}},
                "The confirmation message."),
      make_tool("check_bus_schedule", "CheckBusSchedule",
                "Check the bus schedule for a specific bus stop.",
                {{"bus_stop", "The name of the bus stop.", true}},
                "The bus schedule information."),
      make_tool("google_search", "GoogleSearch", "Search on Google.",
                {{"query", "Search query.", true}}, "Description of the search result."),
      make_tool("set_timer", "SetTimer", "Set a timer for a specific duration.",
                {{"duration", "The duration of the timer.", true}},
                "The timer set confirmation."),
      make_tool("query_stock", "QueryStock",
                "This API queries the stock price of a given stock code and date.",
                {{"stock_code", "The stock code of the given stock.", true},
                 {"date", "The date of the stock price.", true}},
                "The stock price of the given stock."),
      make_tool("add_meeting", "AddMeeting",
                "This API allows users to make a reservation for a meeting and store the "
                "meeting information (e.g., topic, time, location, attendees) in the database.",
                {{"topic", "The topic of the meeting.", true},
                 {"start_time", "The start time of the meeting.", true},
                 {"location", "The location where the meeting to be held.", true}},
                "Success or failed."),
      make_tool("send_email", "SendEmail",
                "This API for sending email, given the receiver, subject and content.",
                {{"receiver", "The receiver address of the email.", true},
                 {"subject", "The subject address of the email.", true},
                 {"content", "The content of the email.", true}},
                "The status of the email."),
  };
}

}  // namespace

ToolRegistry ToolRegistry::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

const ToolRegistry& registry_default() {
  static const ToolRegistry registry(default_tools());
  return registry;
}

Diagnostics validate_args(const ToolDescriptor& descriptor,
                          const std::vector<std::string>& param_names) {
  Diagnostics out;
  for (const auto& spec : descriptor.params) {
    if (spec.required &&
        std::find(param_names.begin(), param_names.end(), spec.name) == param_names.end()) {
      out.push_back({DiagnosticKind::MissingParam, std::nullopt, spec.name,
                     descriptor.name + " requires '" + spec.name + "'"});
    }
  }
  for (const auto& name : param_names) {
    if (!descriptor.find_param(name)) {
      out.push_back({DiagnosticKind::UnknownParam, std::nullopt, name,
                     descriptor.name + " has no param '" + name + "'"});
    }
  }
  return out;
}

Diagnostics validate_args(const ToolDescriptor& descriptor, const TextArgs& args) {
  std::vector<std::string> names;
  names.reserve(args.size());
  for (const auto& [name, _] : args) names.push_back(name);
  return validate_args(descriptor, names);
}

std::string normalize_key_text(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(" \t\r\n");
  std::string out(text.substr(begin, end - begin + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string call_key(std::string_view tool, const TextArgs& args) {
  std::vector<std::pair<std::string, std::string>> sorted;
  sorted.reserve(args.size());
  for (const auto& [name, value] : args) sorted.emplace_back(name, normalize_key_text(value));
  std::sort(sorted.begin(), sorted.end());
  std::string key(tool);
  key += '(';
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i) key += ", ";
    key += sorted[i].first + "=" + sorted[i].second;
  }
  key += ')';
  return key;
}

namespace {

std::string weather_key(std::string_view city, std::string_view time) {
  return normalize_key_text(city) + "|" + normalize_key_text(time);
}

TextArgs args_from_json(const json& doc) {
  TextArgs args;
  if (doc.is_null()) return args;
  for (const auto& [name, value] : doc.items()) {
    args.emplace_back(name, value.is_string() ? value.get<std::string>() : value.dump());
  }
  return args;
}

}  // namespace

WorldFixture WorldFixture::from_json(const json& doc) {
  WorldFixture fixture;
  try {
    fixture.clock_ = doc.value("clock", fixture.clock_);
    if (doc.contains("location")) {
      const auto& loc = doc.at("location");
      fixture.location_.latitude = loc.value("latitude", fixture.location_.latitude);
      fixture.location_.longitude = loc.value("longitude", fixture.location_.longitude);
      fixture.location_.city = loc.value("city", fixture.location_.city);
    }
    for (const auto& entry : doc.value("weather", json::array())) {
      fixture.weather_[weather_key(entry.at("city").get<std::string>(),
                                   entry.at("time").get<std::string>())] =
          entry.at("text").get<std::string>();
    }
    for (const auto& entry : doc.value("agenda", json::array())) {
      fixture.agenda_.push_back(
          {entry.at("title").get<std::string>(), entry.at("time").get<std::string>()});
    }
    for (const auto& entry : doc.value("responses", json::array())) {
      const auto tool = entry.at("tool").get<std::string>();
      auto fields = entry.at("fields").get<std::map<std::string, std::string>>();
      if (!fields.contains("text")) {
        throw ConfigError("canned response for " + tool + " lacks a 'text' field");
      }
      fixture.canned_[call_key(tool, args_from_json(entry.value("args", json::object())))] =
          std::move(fields);
    }
    for (const auto& entry : doc.value("failures", json::array())) {
      const auto tool = entry.at("tool").get<std::string>();
      if (entry.contains("args")) {
        fixture.failing_calls_.insert(call_key(tool, args_from_json(entry.at("args"))));
      } else {
        fixture.failing_tools_.insert(tool);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("world fixture: ") + e.what());
  }
  return fixture;
}

WorldFixture WorldFixture::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

std::optional<std::string> WorldFixture::weather(std::string_view city,
                                                 std::string_view time) const {
  auto it = weather_.find(weather_key(city, time));
  if (it == weather_.end()) return std::nullopt;
  return it->second;
}

const std::map<std::string, std::string>* WorldFixture::canned(std::string_view tool,
                                                               const TextArgs& args) const {
  auto it = canned_.find(call_key(tool, args));
  return it == canned_.end() ? nullptr : &it->second;
}

bool WorldFixture::fails(std::string_view tool, const TextArgs& args) const {
  return failing_tools_.contains(std::string(tool)) ||
         failing_calls_.contains(call_key(tool, args));
}

namespace {

std::string arg_or(const TextArgs& args, std::string_view name, std::string fallback) {
  for (const auto& [param, value] : args) {
    if (param == name) return value;
  }
  return fallback;
}

// Text for any call without a fixture entry: the tool name and its sorted
// normalized args.
std::string default_text(std::string_view tool, const TextArgs& args) {
  return "[mock] " + call_key(tool, args);
}

std::map<std::string, std::string> builtin_fields(const WorldFixture& fixture,
                                                  std::string_view tool,
                                                  const TextArgs& args) {
  if (tool == "get_current_gps_coordinates") {
    const auto& loc = fixture.location();
    return {{"city", loc.city},
            {"latitude", loc.latitude},
            {"longitude", loc.longitude},
            {"text", "Latitude " + loc.latitude + ", longitude " + loc.longitude + " (" +
                         loc.city + ")"}};
  }
  if (tool == "get_current_datetime") {
    const auto& clock = fixture.clock();
    auto split = clock.find('T');
    std::string date = clock.substr(0, split);
    std::string time = split == std::string::npos ? std::string{} : clock.substr(split + 1);
    return {{"date", date}, {"time", time}, {"text", "Current date and time: " + date + " " + time}};
  }
  if (tool == "get_city_weather") {
    auto city = arg_or(args, "city", "");
    auto time = arg_or(args, "time", "");
    if (auto forecast = fixture.weather(city, time)) return {{"text", *forecast}};
    return {};
  }
  if (tool == "check_agenda_time_conflict") {
    auto time = arg_or(args, "time", "");
    std::ostringstream text;
    bool conflict = false;
    text << "Agenda:";
    if (fixture.agenda().empty()) text << " no events";
    for (std::size_t i = 0; i < fixture.agenda().size(); ++i) {
      const auto& event = fixture.agenda()[i];
      text << (i ? "; " : " ") << event.title << " at " << event.time;
      if (!time.empty() && normalize_key_text(event.time) == normalize_key_text(time)) {
        conflict = true;
      }
    }
    text << ". ";
    if (time.empty()) {
      text << "No time given to check.";
    } else {
      text << (conflict ? "Conflict at " : "No conflict at ") << time << ".";
    }
    return {{"text", text.str()}};
  }
  return {};
}

}  // namespace

ToolResult invoke(const ToolRegistry& registry, const WorldFixture& fixture,
                  std::string_view name, const TextArgs& args) {
  const auto& descriptor = registry.lookup(name);
  if (auto problems = validate_args(descriptor, args); !problems.empty()) {
    throw InvalidArguments(format(problems.front()));
  }
  if (fixture.fails(name, args)) {
    throw SimulatedFailure("fixture marks " + call_key(name, args) + " as failing");
  }

  ToolResult result;
  if (const auto* canned = fixture.canned(name, args)) {
    result.fields = *canned;
  } else {
    result.fields = builtin_fields(fixture, name, args);
  }
  if (!result.fields.contains("text")) result.fields["text"] = default_text(name, args);
  for (const auto& field : descriptor.output_fields) {
    if (!result.fields.contains(field)) {
      result.fields[field] = result.fields["text"] + " [" + field + "]";
    }
  }
  return result;
}

}  // namespace proagent
