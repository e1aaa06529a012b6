#pragma once

#include <iosfwd>
#include <string>

#include "minlp/model.hpp"

namespace minlp {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

Model readModelJson(const std::string& text);
Model readModelFile(const std::string& path);
std::string writeModelJson(const Model& m);
void writeModelFile(const Model& m, const std::string& path);

}  // namespace minlp
