#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <map>

#include "http.hpp"
#include "proagent/reasoner.hpp"

namespace proagent::reasoner {

using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<std::string>& default_visual_exemplars() {
  static const std::vector<std::string> exemplars = {
      "Visual information shows the user is standing at a bus stop on a busy street. A bus is "
      "pulling away from the stop and the user is looking at a timetable on the shelter wall.",
      "Visual information shows the user is sitting at a dining table with a plate of fried "
      "chicken, fries and a large soda. A glucose monitor is visible on the user's upper arm.",
      "Visual information shows the user is in a supermarket aisle holding two brands of "
      "coffee beans and comparing the price labels on the shelf.",
      "Visual information shows the user is in an office meeting room. A colleague is pointing "
      "at a whiteboard that reads \"Launch review - next Tuesday 3 PM\".",
      "Visual information shows the user is walking on a quiet park path lined with trees. No "
      "other people, signs or devices are visible.",
  };
  return exemplars;
}

std::string build_visual_prompt(const std::vector<std::string>& exemplars) {
  std::string out =
      "Describe what the user sees in the attached image from the user's own point of view. "
      "Be objective and specific. Capture the cues that matter for deciding whether the user "
      "could use help: the location, the objects, other people, visible text, and what the user "
      "is doing. Leave out decorative detail and do not guess the user's intent. Write one "
      "short paragraph starting with \"Visual information shows\".\n\nExamples:\n";
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    out += std::to_string(i + 1) + ". " + exemplars[i] + "\n";
  }
  return out;
}

PerceptionConfig PerceptionConfig::from_json(const json& doc) {
  try {
    PerceptionConfig config;
    auto mode = doc.value("mode", "passthrough");
    if (mode == "passthrough") {
      config.mode = PerceptionMode::Passthrough;
    } else if (mode == "stub") {
      config.mode = PerceptionMode::Stub;
    } else if (mode == "remote") {
      config.mode = PerceptionMode::Remote;
    } else {
      throw ConfigError("unknown perception mode '" + mode + "'");
    }
    config.canned = doc.value("canned", "");
    config.endpoint = doc.value("endpoint", "");
    config.model = doc.value("model", "");
    config.credential_env = doc.value("credential_env", "");
    config.timeout_s = doc.value("timeout_s", config.timeout_s);
    if (doc.contains("exemplars")) config.exemplars = doc.at("exemplars").get<std::vector<std::string>>();
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("perception config: ") + e.what());
  }
}

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::string image_mime(const std::filesystem::path& path) {
  static const std::map<std::string, std::string> types = {
      {".jpg", "image/jpeg"}, {".jpeg", "image/jpeg"}, {".png", "image/png"},
      {".webp", "image/webp"}, {".gif", "image/gif"}};
  auto it = types.find(lower_extension(path));
  if (it == types.end()) {
    throw UnsupportedMedia(path.string() + ": expected a jpg, png, webp or gif frame");
  }
  return it->second;
}

std::string audio_mime(const std::filesystem::path& path) {
  static const std::map<std::string, std::string> types = {
      {".wav", "audio/wav"}, {".mp3", "audio/mpeg"}, {".m4a", "audio/mp4"},
      {".flac", "audio/flac"}, {".ogg", "audio/ogg"}, {".webm", "audio/webm"}};
  auto it = types.find(lower_extension(path));
  if (it == types.end()) {
    throw UnsupportedMedia(path.string() + ": expected wav, mp3, m4a, flac, ogg or webm audio");
  }
  return it->second;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Passthrough and stub answers; nullopt when the remote client is needed.
std::optional<std::string> local_answer(const MediaInput& media, const PerceptionConfig& config) {
  switch (config.mode) {
    case PerceptionMode::Passthrough:
      if (media.text) return *media.text;
      throw ClientUnavailable("passthrough mode needs text and no client is configured");
    case PerceptionMode::Stub:
      return config.canned;
    case PerceptionMode::Remote:
      if (config.endpoint.empty()) throw ClientUnavailable("no perception endpoint configured");
      if (!media.path) throw ClientUnavailable("remote perception needs a media file");
      return std::nullopt;
  }
  return std::nullopt;
}

std::string reply_or_throw(const detail::HttpOutcome& outcome, const std::string& endpoint) {
  if (!outcome.connected) throw ClientUnavailable(endpoint + " unreachable: " + outcome.error);
  if (outcome.status != 200) {
    throw ClientUnavailable(endpoint + " returned HTTP " + std::to_string(outcome.status));
  }
  return outcome.body;
}

}  // namespace

std::string extract_visual(const MediaInput& media, const PerceptionConfig& config) {
  if (auto answer = local_answer(media, config)) return *answer;
  auto mime = image_mime(*media.path);
  auto data = read_bytes(*media.path);
  const auto& exemplars = config.exemplars.empty() ? default_visual_exemplars() : config.exemplars;
  ordered_json content = ordered_json::array();
  content.push_back({{"type", "text"}, {"text", build_visual_prompt(exemplars)}});
  content.push_back({{"type", "image_url"},
                     {"image_url", {{"url", "data:" + mime + ";base64," + httplib::detail::base64_encode(data)}}}});
  ordered_json body{{"model", config.model},
                    {"messages", ordered_json::array({{{"role", "user"}, {"content", content}}})},
                    {"temperature", 0}};
  auto endpoint = detail::split_url(config.endpoint);
  auto token = detail::read_credential(config.credential_env);
  auto client = detail::make_client(endpoint, config.timeout_s, token);
  auto reply = reply_or_throw(detail::outcome_of(client.Post(endpoint.path, body.dump(), "application/json")),
                              config.endpoint);
  try {
    return json::parse(reply).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ClientUnavailable(config.endpoint + " sent an unexpected reply: " + e.what());
  }
}

std::string extract_audio(const MediaInput& media, const PerceptionConfig& config) {
  if (auto answer = local_answer(media, config)) return *answer;
  auto mime = audio_mime(*media.path);
  auto data = read_bytes(*media.path);
  httplib::MultipartFormDataItems items = {
      {"file", data, media.path->filename().string(), mime},
      {"model", config.model, "", ""},
  };
  auto endpoint = detail::split_url(config.endpoint);
  auto token = detail::read_credential(config.credential_env);
  auto client = detail::make_client(endpoint, config.timeout_s, token);
  auto reply = reply_or_throw(detail::outcome_of(client.Post(endpoint.path, items)), config.endpoint);
  try {
    return json::parse(reply).at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw ClientUnavailable(config.endpoint + " sent an unexpected reply: " + e.what());
  }
}

}  // namespace proagent::reasoner
