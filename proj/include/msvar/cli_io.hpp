#pragma once

#include "msvar/market.hpp"
#include "msvar/model.hpp"
#include "msvar/regime_mixture.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace msvar {

struct MarketSpec {
  enum class Kind { Normal, Fx, Hjm };
  Kind kind = Kind::Normal;
  NormalMarket normal;
  FxMarket fx;
  HjmLayout hjm;
};

/// Parsed model file. `regimes`, when present, is the known regime prefix s_1..s_t.
struct ModelFile {
  MsVarModel model;
  MarketSpec market;
  PathState state;
  std::optional<RegimePath> regimes;
};

/// Throws ValidationError naming the JSON path of the offending field, e.g. "transition[0]".
[[nodiscard]] ModelFile parse_model(const nlohmann::json& doc);
/// Throws ParseError for unreadable files or malformed JSON.
[[nodiscard]] ModelFile load_model(const std::string& path);
[[nodiscard]] nlohmann::json serialize_model(const ModelFile& file);

/// {"draws": [{"regimes", "transition", "initial_dist", optional "cov_initial", optional "weight"}, ...]}.
/// Each block replaces the parameter part of `base`; dimensions, market and state stay shared.
[[nodiscard]] std::vector<ParameterDraw> parse_draws(const nlohmann::json& doc, const ModelFile& base);
[[nodiscard]] std::vector<ParameterDraw> load_draws(const std::string& path, const ModelFile& base);

/// Tabular result shared by the table, CSV and JSON writers.
using Cell = std::variant<std::string, double, long long>;
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

enum class OutputFormat { Table, Csv, Json };

void write_table(std::ostream& out, const Table& table, OutputFormat format);
/// RFC 4180 field quoting.
[[nodiscard]] std::string csv_field(const std::string& s);

/// Entry point of the command-line tool. Exit codes: 0 success, 2 usage, 3 validation, 4 numerical.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace msvar
