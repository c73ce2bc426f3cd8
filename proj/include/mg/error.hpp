#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The 7x7 force-balance system for a mode is rank deficient.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

class InvalidPlane : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A coefficient that must be stored lies outside the retained band.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Continued-fraction tail hit the positive floor.
class DegenerateTail : public Error {
 public:
  using Error::Error;
};

/// No sign change of the continued-fraction residual in the bracket.
class NoRoot : public Error {
 public:
  NoRoot(const std::string& what, double lo, double hi)
      : Error(what), lo_(lo), hi_(hi) {}
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Backward recursion could not be normalised in floating point.
class RecursionInstability : public Error {
 public:
  using Error::Error;
};

class EmptyResult : public Error {
 public:
  using Error::Error;
};

class DegenerateWindow : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Time integration produced a non-finite or runaway state.
class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, double time, std::vector<double> history)
      : Error(what), time_(time), history_(std::move(history)) {}
  double time() const { return time_; }
  const std::vector<double>& history() const { return history_; }

 private:
  double time_;
  std::vector<double> history_;
};

/// Requested horizon exceeds the resolved growth budget of an ill-posed regime.
class IllPosednessCeiling : public Error {
 public:
  IllPosednessCeiling(const std::string& what, double t_max)
      : Error(what), t_max_(t_max) {}
  double t_max() const { return t_max_; }

 private:
  double t_max_;
};

}  // namespace mg
