#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace thermoshift {

// Base class for all library errors. Subclasses map onto the CLI exit codes:
// config errors -> 2, numerical non-convergence -> 3, budget exceeded -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

class EmptyTruncation : public Error {
 public:
  explicit EmptyTruncation(const std::string& what) : Error(what) {}
};

class Disconnected : public Error {
 public:
  explicit Disconnected(const std::string& what) : Error(what) {}
};

class LetterAbsent : public Error {
 public:
  explicit LetterAbsent(const std::string& what) : Error(what) {}
};

class InadmissibleWord : public Error {
 public:
  explicit InadmissibleWord(const std::string& what) : Error(what) {}
};

class NotEventuallyPositive : public Error {
 public:
  explicit NotEventuallyPositive(const std::string& what) : Error(what) {}
};

class TooManyCylinders : public Error {
 public:
  TooManyCylinders(const std::string& what, std::size_t limit)
      : Error(what), limit(limit) {}
  std::size_t limit;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double last_residual)
      : Error(what), last_residual(last_residual) {}
  double last_residual;
};

class NoSignChange : public Error {
 public:
  explicit NoSignChange(const std::string& what) : Error(what) {}
};

class TailModelUnavailable : public Error {
 public:
  explicit TailModelUnavailable(const std::string& what) : Error(what) {}
};

// Preimage-tree search hit its node budget; carries the partial lower bound
// accumulated so far.
class BudgetExplosion : public Error {
 public:
  BudgetExplosion(const std::string& what, double partial, std::uint64_t nodes)
      : Error(what), partial_lower_bound(partial), nodes_visited(nodes) {}
  double partial_lower_bound;
  std::uint64_t nodes_visited;
};

class CutoffTooSmall : public Error {
 public:
  explicit CutoffTooSmall(const std::string& what) : Error(what) {}
};

class SamplePointPeriodic : public Error {
 public:
  explicit SamplePointPeriodic(const std::string& what) : Error(what) {}
};

class PingPongFailure : public Error {
 public:
  explicit PingPongFailure(const std::string& what) : Error(what) {}
};

class NumericallySingular : public Error {
 public:
  explicit NumericallySingular(const std::string& what) : Error(what) {}
};

class DegenerateFlag : public Error {
 public:
  explicit DegenerateFlag(const std::string& what) : Error(what) {}
};

}  // namespace thermoshift
