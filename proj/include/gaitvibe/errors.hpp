#pragma once

#include <stdexcept>
#include <string>

namespace gaitvibe
{

// Every library failure derives from Error. The CLI maps input/config
// failures (InputClass) to exit code 2 and anything else to 1.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Failures caused by bad input data or configuration.
class InputClass : public Error
{
public:
  using Error::Error;
};

class InputError : public InputClass
{
public:
  using InputClass::InputClass;
};

class ConfigError : public InputClass
{
public:
  using InputClass::InputClass;
};

class CalibrationError : public InputClass
{
public:
  using InputClass::InputClass;
};

class ScenarioError : public InputClass
{
public:
  using InputClass::InputClass;
};

class EvalError : public InputClass
{
public:
  using InputClass::InputClass;
};

class DegenerateGeometry : public InputClass
{
public:
  using InputClass::InputClass;
};

// Per-footstep failures. These are collected during tracking, not fatal.
class NoArrivalCandidate : public Error
{
public:
  using Error::Error;
};

class NoArrivalFound : public Error
{
public:
  using Error::Error;
};

class OrderInconsistent : public Error
{
public:
  using Error::Error;
};

class ArrivalRejected : public Error
{
public:
  using Error::Error;
};

} // namespace gaitvibe
