#include "tickx/symbols.h"

#include "tickx/errors.h"
#include "tickx/io.h"

namespace tickx {

SymbolTable::SymbolTable(std::vector<SymbolInfo> entries)
    : entries_(std::move(entries)) {
  for (const auto &e : entries_) {
    if (e.aliases.empty()) throw ConfigError("symbol without aliases: " + e.symbol);
    for (const auto &a : e.aliases) {
      if (a.empty()) throw ConfigError("empty alias for " + e.symbol);
    }
  }
}

const SymbolInfo *SymbolTable::find(const std::string &symbol) const {
  for (const auto &e : entries_) {
    if (e.symbol == symbol) return &e;
  }
  return nullptr;
}

void save_symbol_table(const SymbolTable &table,
                       const std::filesystem::path &path) {
  Json out = Json::array();
  for (const auto &e : table.entries()) {
    out.push_back({{"symbol", e.symbol},
                   {"aliases", e.aliases},
                   {"min_value", e.min_value},
                   {"max_value", e.max_value},
                   {"rel_min", e.rel_min},
                   {"rel_max", e.rel_max}});
  }
  write_file(path, out.dump(2) + "\n");
}

SymbolTable load_symbol_table(const std::filesystem::path &path) {
  std::vector<SymbolInfo> entries;
  try {
    const Json j = Json::parse(read_file(path));
    for (const auto &e : j) {
      SymbolInfo info;
      info.symbol = e.at("symbol").get<std::string>();
      info.aliases = e.at("aliases").get<std::vector<std::string>>();
      info.min_value = e.at("min_value").get<double>();
      info.max_value = e.at("max_value").get<double>();
      info.rel_min = e.at("rel_min").get<double>();
      info.rel_max = e.at("rel_max").get<double>();
      entries.push_back(std::move(info));
    }
  } catch (const Json::exception &e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return SymbolTable(std::move(entries));
}

}  // namespace tickx
