#pragma once

#include "qcgeom/io.hpp"

#include <string>
#include <vector>

namespace qcgeom {

// Validator for the JSON Schema keywords used by the published config schema:
// $ref (local), type, const, enum, minimum, maximum, exclusiveMinimum,
// minLength, minItems, maxItems, items, properties, required,
// additionalProperties (boolean or schema), allOf, anyOf, oneOf.
// Other keywords are ignored.
class SchemaValidator {
 public:
  explicit SchemaValidator(Json root);

  // Empty when the instance conforms; otherwise one message per failure.
  std::vector<std::string> validate(const Json& instance) const;
  std::vector<std::string> validate(const Json& instance, const std::string& ref) const;

  const Json& root() const { return root_; }

 private:
  void check(const Json& schema, const Json& value, const std::string& path, std::vector<std::string>& out,
             int depth) const;
  const Json& resolve(const std::string& ref) const;

  Json root_;
};

}  // namespace qcgeom
