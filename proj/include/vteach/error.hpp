#pragma once

#include <stdexcept>
#include <string>

namespace vteach {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class EpisodeExhausted : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class IncompleteData : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient during an update. `step` is the index of the
// offending transition or update, when known.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, int milestone)
      : Error(what + " (milestone " + std::to_string(milestone) + ")"),
        milestone_(milestone) {}
  int milestone() const { return milestone_; }

 private:
  int milestone_;
};

}  // namespace vteach
