#pragma once

#include "mjpa/iph.hpp"
#include "mjpa/model.hpp"
#include "mjpa/mph.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mjpa {

// Malformed JSON or a field of the wrong type/shape. `where()` names the
// field (or "line L, column C" for syntax errors).
class SchemaError : public std::invalid_argument {
public:
  SchemaError(std::string where, const std::string &what)
      : std::invalid_argument(where + ": " + what), where_(std::move(where)) {}
  const std::string &where() const { return where_; }

private:
  std::string where_;
};

struct ModelSpec {
  std::size_t p = 0;
  RowVector alpha;
  Matrix S;
  HazardFamily family = HazardFamily::constant;
  double beta = 1.0;
  std::vector<std::pair<double, double>> table;
  double cap = kDefaultCap;
  std::optional<Matrix> R;
  std::optional<RowVector> pi;

  IPHModel model() const;
  /// pi when given, alpha otherwise.
  ProbVector initial() const;
  RewardMatrix rewards() const;
};

ModelSpec parse_model(const std::string &text);
ModelSpec load_model(const std::string &path);

std::string mixture_to_json(const ErlangMixture &m);
ErlangMixture mixture_from_json(const std::string &text);

/// "start:stop:step", both endpoints included (stop within half a step).
std::vector<double> parse_grid(const std::string &spec);
/// Comma-separated list of numbers.
std::vector<double> parse_list(const std::string &spec);

/// One positive real per line; a non-numeric first line is taken as a header.
std::vector<double> read_sample(const std::string &path);

/// 17 significant digits, shortest round-trip form not required.
std::string format_double(double x);

} // namespace mjpa
