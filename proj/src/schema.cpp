#include "qcgeom/schema.hpp"

#include <cmath>

namespace qcgeom {

namespace {

bool has_type(const Json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") {
    if (v.is_number_integer()) return true;
    if (!v.is_number_float()) return false;
    const double d = v.get<double>();
    return std::isfinite(d) && d == std::floor(d);
  }
  throw ValidationError("schema uses unknown type '" + t + "'");
}

// JSON Schema equality: 1 and 1.0 are the same number.
bool json_equal(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return a.get<double>() == b.get<double>();
  return a == b;
}

}  // namespace

SchemaValidator::SchemaValidator(Json root) : root_(std::move(root)) {
  if (!root_.is_object()) throw ValidationError("schema root must be an object");
}

const Json& SchemaValidator::resolve(const std::string& ref) const {
  if (ref == "#") return root_;
  const std::string prefix = "#/$defs/";
  if (ref.rfind(prefix, 0) != 0) throw ValidationError("unsupported $ref '" + ref + "'");
  const auto name = ref.substr(prefix.size());
  if (!root_.contains("$defs") || !root_["$defs"].contains(name)) throw ValidationError("unresolved $ref '" + ref + "'");
  return root_["$defs"][name];
}

std::vector<std::string> SchemaValidator::validate(const Json& instance) const {
  std::vector<std::string> out;
  check(root_, instance, "", out, 0);
  return out;
}

std::vector<std::string> SchemaValidator::validate(const Json& instance, const std::string& ref) const {
  std::vector<std::string> out;
  check(resolve(ref), instance, "", out, 0);
  return out;
}

void SchemaValidator::check(const Json& s, const Json& v, const std::string& path, std::vector<std::string>& out,
                            int depth) const {
  if (depth > 64) throw ValidationError("schema recursion too deep at " + path);
  const std::string where = path.empty() ? "/" : path;
  auto fail = [&](const std::string& msg) { out.push_back(where + ": " + msg); };

  if (s.contains("$ref")) check(resolve(s["$ref"].get<std::string>()), v, path, out, depth + 1);
  if (s.contains("allOf"))
    for (const auto& sub : s["allOf"]) check(sub, v, path, out, depth + 1);
  if (s.contains("anyOf")) {
    bool any = false;
    for (const auto& sub : s["anyOf"]) {
      std::vector<std::string> tmp;
      check(sub, v, path, tmp, depth + 1);
      any = any || tmp.empty();
    }
    if (!any) fail("matches none of anyOf");
  }
  if (s.contains("oneOf")) {
    int matches = 0;
    std::vector<std::string> closest;
    for (const auto& sub : s["oneOf"]) {
      std::vector<std::string> tmp;
      check(sub, v, path, tmp, depth + 1);
      if (tmp.empty()) ++matches;
      else if (closest.empty() || tmp.size() < closest.size()) closest = std::move(tmp);
    }
    if (matches == 0) {
      fail("matches none of oneOf");
      out.insert(out.end(), closest.begin(), closest.end());
    } else if (matches > 1) {
      fail("matches more than one of oneOf");
    }
  }
  if (s.contains("type")) {
    const auto& t = s["type"];
    bool ok = false;
    if (t.is_string()) ok = has_type(v, t.get<std::string>());
    else
      for (const auto& x : t) ok = ok || has_type(v, x.get<std::string>());
    if (!ok) {
      fail("expected type " + t.dump());
      return;
    }
  }
  if (s.contains("const") && !json_equal(s["const"], v)) fail("expected " + s["const"].dump());
  if (s.contains("enum")) {
    bool ok = false;
    for (const auto& e : s["enum"]) ok = ok || json_equal(e, v);
    if (!ok) fail("expected one of " + s["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && x < s["minimum"].get<double>()) fail("below minimum " + s["minimum"].dump());
    if (s.contains("maximum") && x > s["maximum"].get<double>()) fail("above maximum " + s["maximum"].dump());
    if (s.contains("exclusiveMinimum") && !(x > s["exclusiveMinimum"].get<double>()))
      fail("must exceed " + s["exclusiveMinimum"].dump());
  }
  if (v.is_string() && s.contains("minLength") &&
      v.get<std::string>().size() < s["minLength"].get<std::size_t>())
    fail("string shorter than " + s["minLength"].dump());
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>())
      fail("fewer than " + s["minItems"].dump() + " items");
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>())
      fail("more than " + s["maxItems"].dump() + " items");
    if (s.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) check(s["items"], v[i], path + "/" + std::to_string(i), out, depth + 1);
  }
  if (v.is_object()) {
    if (s.contains("required"))
      for (const auto& r : s["required"])
        if (!v.contains(r.get<std::string>())) fail("missing required field '" + r.get<std::string>() + "'");
    const Json* props = s.contains("properties") ? &s["properties"] : nullptr;
    for (const auto& [key, val] : v.items()) {
      if (props && props->contains(key)) {
        check((*props)[key], val, path + "/" + key, out, depth + 1);
      } else if (s.contains("additionalProperties")) {
        const auto& ap = s["additionalProperties"];
        if (ap.is_boolean()) {
          if (!ap.get<bool>()) fail("unknown field '" + key + "'");
        } else {
          check(ap, val, path + "/" + key, out, depth + 1);
        }
      }
    }
  }
}

}  // namespace qcgeom
