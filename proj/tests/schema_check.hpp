#pragma once

// Minimal JSON Schema checker covering exactly the keywords used by the
// schemas shipped in schemas/. Keeps the shipped schema files and the strict
// C++ parsers honest with each other without pulling in a full validator.

#include <string>
#include <vector>

#include "json.hpp"

namespace schemacheck {

using nlohmann::json;

inline bool type_matches(const std::string& name, const json& v) {
  if (name == "object") return v.is_object();
  if (name == "array") return v.is_array();
  if (name == "string") return v.is_string();
  if (name == "boolean") return v.is_boolean();
  if (name == "null") return v.is_null();
  if (name == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (name == "number") return v.is_number();
  return false;
}

inline void validate(const json& schema, const json& instance,
                     const json& root, const std::string& path,
                     std::vector<std::string>& errors) {
  if (const auto ref = schema.find("$ref"); ref != schema.end()) {
    const std::string target = ref->get<std::string>();
    const std::string prefix = "#/$defs/";
    if (target.rfind(prefix, 0) != 0) {
      errors.push_back(path + ": unsupported $ref " + target);
      return;
    }
    const std::string name = target.substr(prefix.size());
    validate(root.at("$defs").at(name), instance, root, path, errors);
    return;
  }

  if (const auto any = schema.find("anyOf"); any != schema.end()) {
    for (const json& option : *any) {
      std::vector<std::string> branch;
      validate(option, instance, root, path, branch);
      if (branch.empty()) return;
    }
    errors.push_back(path + ": matches no anyOf branch");
    return;
  }

  if (const auto type = schema.find("type"); type != schema.end()) {
    bool ok = false;
    if (type->is_string()) {
      ok = type_matches(type->get<std::string>(), instance);
    } else {
      for (const json& name : *type) {
        if (type_matches(name.get<std::string>(), instance)) ok = true;
      }
    }
    if (!ok) {
      errors.push_back(path + ": wrong type, got " +
                       std::string(instance.type_name()));
      return;
    }
  }

  if (const auto en = schema.find("enum"); en != schema.end()) {
    bool ok = false;
    for (const json& allowed : *en) {
      if (allowed == instance) ok = true;
    }
    if (!ok) errors.push_back(path + ": not one of the enum values");
  }

  if (instance.is_number()) {
    const double v = instance.get<double>();
    if (const auto it = schema.find("minimum"); it != schema.end()) {
      if (v < it->get<double>()) errors.push_back(path + ": below minimum");
    }
    if (const auto it = schema.find("maximum"); it != schema.end()) {
      if (v > it->get<double>()) errors.push_back(path + ": above maximum");
    }
    if (const auto it = schema.find("exclusiveMinimum"); it != schema.end()) {
      if (v <= it->get<double>()) {
        errors.push_back(path + ": not above exclusiveMinimum");
      }
    }
  }

  if (instance.is_string()) {
    if (const auto it = schema.find("minLength"); it != schema.end()) {
      if (instance.get<std::string>().size() < it->get<std::size_t>()) {
        errors.push_back(path + ": shorter than minLength");
      }
    }
  }

  if (instance.is_array()) {
    if (const auto it = schema.find("minItems"); it != schema.end()) {
      if (instance.size() < it->get<std::size_t>()) {
        errors.push_back(path + ": fewer than minItems entries");
      }
    }
    if (const auto it = schema.find("maxItems"); it != schema.end()) {
      if (instance.size() > it->get<std::size_t>()) {
        errors.push_back(path + ": more than maxItems entries");
      }
    }
    if (const auto items = schema.find("items"); items != schema.end()) {
      for (std::size_t i = 0; i < instance.size(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        if (items->is_array()) {
          if (i < items->size()) {
            validate((*items)[i], instance[i], root, at, errors);
          }
        } else {
          validate(*items, instance[i], root, at, errors);
        }
      }
    }
  }

  if (instance.is_object()) {
    if (const auto it = schema.find("minProperties"); it != schema.end()) {
      if (instance.size() < it->get<std::size_t>()) {
        errors.push_back(path + ": fewer than minProperties keys");
      }
    }
    if (const auto it = schema.find("maxProperties"); it != schema.end()) {
      if (instance.size() > it->get<std::size_t>()) {
        errors.push_back(path + ": more than maxProperties keys");
      }
    }
    if (const auto req = schema.find("required"); req != schema.end()) {
      for (const json& key : *req) {
        if (!instance.contains(key.get<std::string>())) {
          errors.push_back(path + ": missing required key " +
                           key.get<std::string>());
        }
      }
    }
    const auto props = schema.find("properties");
    for (const auto& [key, value] : instance.items()) {
      if (props != schema.end() && props->contains(key)) {
        validate(props->at(key), value, root, path + "/" + key, errors);
      } else if (const auto ap = schema.find("additionalProperties");
                 ap != schema.end() && ap->is_boolean() && !ap->get<bool>()) {
        errors.push_back(path + ": unknown key " + key);
      }
    }
  }
}

inline std::vector<std::string> check(const json& schema,
                                      const json& instance) {
  std::vector<std::string> errors;
  validate(schema, instance, schema, "", errors);
  return errors;
}

}  // namespace schemacheck
