#pragma once

#include <Eigen/Core>
#include <json.hpp>

#include <stdexcept>
#include <string>

namespace mixsing {

/// Precondition or configuration violation.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical pipeline stage that could not reach its postcondition.
///
/// Carries the stage name, a machine-readable payload and (when meaningful)
/// the last iterate so callers can inspect or resume.
class SolverFailure : public std::runtime_error {
public:
  SolverFailure(std::string stage, const std::string& message,
                nlohmann::json data = nlohmann::json::object(),
                Eigen::VectorXd last_iterate = {})
      : std::runtime_error(stage + ": " + message),
        stage_(std::move(stage)),
        message_(message),
        data_(std::move(data)),
        last_iterate_(std::move(last_iterate))
  {
  }

  const std::string& stage() const noexcept { return stage_; }
  const std::string& message() const noexcept { return message_; }
  const nlohmann::json& data() const noexcept { return data_; }
  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }

  /// {stage, message, data}
  nlohmann::json to_json() const
  {
    return {{"stage", stage_}, {"message", message_}, {"data", data_}};
  }

private:
  std::string stage_;
  std::string message_;
  nlohmann::json data_;
  Eigen::VectorXd last_iterate_;
};

}  // namespace mixsing
