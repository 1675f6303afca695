#pragma once
// Goal categories, room categories, height bands and the per-room
// co-occurrence tables that drive procedural scene generation.

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "zonegraph/common.hpp"

namespace zonegraph {

inline constexpr std::array<std::string_view, 22> kGoalCategories = {
    "AlarmClock", "Book",        "Bowl",          "CellPhone", "Chair",      "CoffeeMachine",
    "DeskLamp",   "FloorLamp",   "Fridge",        "GarbageCan", "Kettle",    "Laptop",
    "LightSwitch", "Microwave",  "Pan",           "Plate",     "Pot",        "RemoteControl",
    "Sink",       "StoveBurner", "Television",    "Toaster"};

inline bool is_goal_category(std::string_view name) {
  return std::find(kGoalCategories.begin(), kGoalCategories.end(), name) != kGoalCategories.end();
}

enum class RoomCategory { LivingRoom, Kitchen, Bedroom, Bathroom };

inline constexpr std::array<RoomCategory, 4> kRoomCategories = {
    RoomCategory::LivingRoom, RoomCategory::Kitchen, RoomCategory::Bedroom, RoomCategory::Bathroom};

inline std::string_view to_string(RoomCategory r) {
  switch (r) {
    case RoomCategory::LivingRoom: return "living_room";
    case RoomCategory::Kitchen: return "kitchen";
    case RoomCategory::Bedroom: return "bedroom";
    case RoomCategory::Bathroom: return "bathroom";
  }
  return "?";
}

inline RoomCategory parse_room(std::string_view s) {
  for (RoomCategory r : kRoomCategories)
    if (to_string(r) == s) return r;
  throw ParseError("unknown room category '" + std::string(s) + "'");
}

/// Vertical band an object occupies; each band is seen at exactly one pitch.
enum class HeightBand { Low, Mid, High };

inline std::string_view to_string(HeightBand b) {
  switch (b) {
    case HeightBand::Low: return "low";
    case HeightBand::Mid: return "mid";
    case HeightBand::High: return "high";
  }
  return "?";
}

inline HeightBand parse_band(std::string_view s) {
  if (s == "low") return HeightBand::Low;
  if (s == "mid") return HeightBand::Mid;
  if (s == "high") return HeightBand::High;
  throw ParseError("unknown height band '" + std::string(s) + "'");
}

inline int band_pitch(HeightBand b) {
  switch (b) {
    case HeightBand::Low: return -30;
    case HeightBand::Mid: return 0;
    case HeightBand::High: return 30;
  }
  return 0;
}

struct ZoneItem {
  std::string category;
  HeightBand band = HeightBand::Mid;
  bool operator==(const ZoneItem&) const = default;
};

using ZoneTemplate = std::vector<ZoneItem>;

/// room -> list of functional zone templates.
struct RoomTables {
  std::map<RoomCategory, std::vector<ZoneTemplate>> zones;
  bool operator==(const RoomTables&) const = default;

  const std::vector<ZoneTemplate>& for_room(RoomCategory r) const {
    auto it = zones.find(r);
    if (it == zones.end() || it->second.empty())
      throw ConfigError("room tables have no zones for " + std::string(to_string(r)));
    return it->second;
  }
};

inline RoomTables parse_room_tables(std::istream& in) {
  RoomTables t;
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line) || line != "room-tables-v1")
    throw ParseError("room tables: line 1: expected 'room-tables-v1'");
  ++lineno;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || word[0] == '#') continue;
    if (word != "zone")
      throw ParseError("room tables: line " + std::to_string(lineno) + ": expected 'zone'");
    std::string room;
    if (!(ls >> room)) throw ParseError("room tables: line " + std::to_string(lineno) + ": missing room");
    ZoneTemplate zone;
    std::string item;
    while (ls >> item) {
      const auto colon = item.find(':');
      if (colon == std::string::npos || colon == 0)
        throw ParseError("room tables: line " + std::to_string(lineno) + ": bad item '" + item + "'");
      zone.push_back({item.substr(0, colon), parse_band(item.substr(colon + 1))});
    }
    if (zone.empty())
      throw ParseError("room tables: line " + std::to_string(lineno) + ": empty zone");
    t.zones[parse_room(room)].push_back(std::move(zone));
  }
  return t;
}

inline RoomTables load_room_tables(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open room tables '" + path + "'");
  return parse_room_tables(in);
}

// Must stay in sync with data/room_tables.txt (a unit test enforces this).
inline constexpr std::string_view kBuiltinRoomTables = R"(room-tables-v1
zone kitchen Stove:low StoveBurner:mid Pan:mid Kettle:mid
zone kitchen Sink:mid Bowl:mid Plate:low
zone kitchen CoffeeMachine:mid Toaster:mid Microwave:high
zone kitchen Fridge:mid GarbageCan:low LightSwitch:high
zone kitchen Cabinet:low Pot:low Plate:mid
zone kitchen DiningTable:low Chair:low Bowl:mid
zone living_room Sofa:low RemoteControl:low Television:mid
zone living_room Shelf:mid Book:mid FloorLamp:high
zone living_room Desk:low Laptop:mid DeskLamp:mid CellPhone:low
zone living_room Armchair:low Chair:low FloorLamp:high
zone living_room Door:mid LightSwitch:high GarbageCan:low
zone bedroom Bed:low AlarmClock:mid DeskLamp:mid
zone bedroom Desk:low Laptop:mid Book:mid CellPhone:low Chair:low
zone bedroom Dresser:low Television:mid RemoteControl:low
zone bedroom Door:mid LightSwitch:high GarbageCan:low FloorLamp:high
zone bathroom Counter:low Sink:mid SoapBottle:mid Mirror:high
zone bathroom Toilet:low GarbageCan:low ToiletPaper:mid
zone bathroom Door:mid LightSwitch:high Towel:mid
zone bathroom Shelf:mid Book:mid CellPhone:mid AlarmClock:mid
)";

inline const RoomTables& builtin_room_tables() {
  static const RoomTables tables = [] {
    std::istringstream in{std::string(kBuiltinRoomTables)};
    return parse_room_tables(in);
  }();
  return tables;
}

/// Every category named anywhere in the tables plus the goal list, sorted.
inline std::vector<std::string> known_categories(const RoomTables& tables) {
  std::vector<std::string> out(kGoalCategories.begin(), kGoalCategories.end());
  for (const auto& [room, zones] : tables.zones)
    for (const auto& z : zones)
      for (const auto& item : z) out.push_back(item.category);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace zonegraph
