#ifndef TICKX_SYMBOLS_H_
#define TICKX_SYMBOLS_H_

#include <filesystem>
#include <string>
#include <vector>

namespace tickx {

// A time-series symbol, the surface forms that refer to it, and the numeric
// ranges its absolute readings and changes may take.
struct SymbolInfo {
  std::string symbol;
  std::vector<std::string> aliases;
  double min_value = 0.0;
  double max_value = 0.0;
  double rel_min = 0.0;
  double rel_max = 0.0;
};

class SymbolTable {
 public:
  SymbolTable() = default;
  explicit SymbolTable(std::vector<SymbolInfo> entries);

  const std::vector<SymbolInfo> &entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  // Returns nullptr when the symbol is not in the table.
  const SymbolInfo *find(const std::string &symbol) const;

 private:
  std::vector<SymbolInfo> entries_;
};

// JSON array of {symbol, aliases, min_value, max_value, rel_min, rel_max}.
void save_symbol_table(const SymbolTable &table,
                       const std::filesystem::path &path);
SymbolTable load_symbol_table(const std::filesystem::path &path);

}  // namespace tickx

#endif  // TICKX_SYMBOLS_H_
