#pragma once

#include <filesystem>

namespace proagent::testing {

inline std::filesystem::path data_dir() { return PROAGENT_DATA_DIR; }
inline std::filesystem::path fixtures_dir() { return data_dir() / "fixtures"; }
inline std::filesystem::path examples_dataset() { return fixtures_dir() / "examples.jsonl"; }
inline std::filesystem::path world_fixture() { return fixtures_dir() / "world.json"; }

// "Tools" field of the first shipped example, verbatim.
inline constexpr const char* kExample1Tools =
    R"j([{"name": "get_current_gps_coordinates", "desc": "Get the current GPS coordinates of the user", "params": "None"}, {"name": "get_city_weather", "desc": "Get the weather for a specified city at a given time.", "params": {"city": "$RESULT(get_current_gps_coordinates.city)", "time": "this weekend"}}, {"name": "get_current_datetime", "desc": "Get the current date and time", "params": "None"}, {"name": "check_agenda_time_conflict", "desc": "Check if there is a time conflict in the user's agenda for a given datetime.", "params": "None"}])j";

inline constexpr const char* kExample3Tools =
    R"j([{"name": "get_current_gps_coordinates", "desc": "Get the current GPS coordinates of the user", "params": "None"},{"name": "get_city_weather", "desc": "Get the weather for a specified city at a given time.", "params": {"city": "$RESULT(get_current_gps_coordinates.city)", "time":"now"}}])j";

}  // namespace proagent::testing
