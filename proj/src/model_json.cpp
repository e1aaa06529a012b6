#include "minlp/model_json.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace minlp {

using nlohmann::json;

namespace {

double boundFromJson(const json& j, double fallback) {
  if (j.is_null()) return fallback;
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ParseError("bad bound string '" + s + "'");
  }
  return j.get<double>();
}

json boundToJson(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

int parseExpr(const json& j, ExprGraph& g,
              const std::map<std::string, VarId>& byname) {
  if (j.is_number()) return g.constant(j.get<double>());
  if (!j.is_object() || !j.contains("op"))
    throw ParseError("expression node must be an object with an 'op' tag");
  std::string op = j.at("op").get<std::string>();
  if (op == "const") return g.constant(j.at("value").get<double>());
  if (op == "var") {
    if (j.contains("name")) {
      auto it = byname.find(j.at("name").get<std::string>());
      if (it == byname.end())
        throw ParseError("unknown variable '" +
                         j.at("name").get<std::string>() + "'");
      return g.var(it->second);
    }
    return g.var(j.at("index").get<VarId>());
  }
  std::vector<int> args;
  if (j.contains("args"))
    for (const auto& a : j.at("args")) args.push_back(parseExpr(a, g, byname));
  auto arity = [&](size_t n) {
    if (args.size() != n)
      throw ParseError("op '" + op + "' expects " + std::to_string(n) +
                       " args");
  };
  if (op == "add") {
    std::vector<std::pair<double, int>> terms;
    for (size_t i = 0; i < args.size(); ++i) {
      double w = 1.0;
      if (j.contains("coefs")) w = j.at("coefs").at(i).get<double>();
      terms.emplace_back(w, args[i]);
    }
    double c = j.value("constant", 0.0);
    return g.sum(std::move(terms), c);
  }
  if (op == "mul") {
    if (args.size() < 2) throw ParseError("'mul' expects >= 2 args");
    int r = args[0];
    for (size_t i = 1; i < args.size(); ++i) r = g.mul(r, args[i]);
    return r;
  }
  if (op == "pow") {
    arity(1);
    return g.pow(args[0], j.at("exponent").get<int>());
  }
  if (op == "exp") { arity(1); return g.exp(args[0]); }
  if (op == "log") { arity(1); return g.log(args[0]); }
  if (op == "sqrt") { arity(1); return g.sqrt(args[0]); }
  if (op == "neg") { arity(1); return g.neg(args[0]); }
  if (op == "inv") { arity(1); return g.inv(args[0]); }
  throw ParseError("unknown op '" + op + "'");
}

json exprToJson(const ExprGraph& g, int root, const Model& m) {
  const Node& n = g.node(root);
  json j;
  switch (n.op) {
    case Op::Const:
      return json{{"op", "const"}, {"value", n.constant}};
    case Op::Var:
      return json{{"op", "var"}, {"name", m.var(n.var).name}};
    case Op::Sum: {
      j["op"] = "add";
      json args = json::array(), coefs = json::array();
      for (size_t k = 0; k < n.kids.size(); ++k) {
        args.push_back(exprToJson(g, n.kids[k], m));
        coefs.push_back(n.coeffs[k]);
      }
      j["args"] = args;
      j["coefs"] = coefs;
      if (n.constant != 0.0) j["constant"] = n.constant;
      return j;
    }
    case Op::Prod:
      return json{{"op", "mul"},
                  {"args", {exprToJson(g, n.kids[0], m),
                            exprToJson(g, n.kids[1], m)}}};
    case Op::Pow:
      return json{{"op", "pow"},
                  {"args", {exprToJson(g, n.kids[0], m)}},
                  {"exponent", n.ipow}};
    default: {
      static const std::map<Op, std::string> names = {
          {Op::Exp, "exp"}, {Op::Log, "log"}, {Op::Sqrt, "sqrt"},
          {Op::Neg, "neg"}, {Op::Inv, "inv"}};
      return json{{"op", names.at(n.op)},
                  {"args", {exprToJson(g, n.kids[0], m)}}};
    }
  }
}

}  // namespace

Model readModelJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  try {
    ModelBuilder b(j.value("name", "model"));
    std::map<std::string, VarId> byname;
    for (const auto& jv : j.at("variables")) {
      std::string dom = jv.value("domain", "continuous");
      Domain d = dom == "integer"  ? Domain::Integer
                 : dom == "binary" ? Domain::Binary
                                   : Domain::Continuous;
      if (dom != "integer" && dom != "binary" && dom != "continuous")
        throw ParseError("bad domain '" + dom + "'");
      std::string name = jv.at("name").get<std::string>();
      VarId id = b.addVar(name, d,
                          boundFromJson(jv.value("lb", json()), -kInf),
                          boundFromJson(jv.value("ub", json()), kInf));
      byname[name] = id;
    }
    if (j.contains("objective"))
      b.setObjective(parseExpr(j.at("objective"), b.graph(), byname));
    for (const auto& jc : j.value("constraints", json::array())) {
      std::string s = jc.value("sense", "<=");
      if (s != "<=" && s != "=") throw ParseError("bad sense '" + s + "'");
      b.addConstraint(parseExpr(jc.at("expr"), b.graph(), byname),
                      s == "=" ? Sense::Eq : Sense::Leq, jc.value("rhs", 0.0));
    }
    if (j.value("convex", false)) b.setConvexity(Convexity::DeclaredConvex);
    return b.build();
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

Model readModelFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return readModelJson(ss.str());
}

std::string writeModelJson(const Model& m) {
  json j;
  j["name"] = m.name();
  if (m.convexity() == Convexity::DeclaredConvex) j["convex"] = true;
  json vars = json::array();
  for (const auto& v : m.vars()) {
    json jv;
    jv["name"] = v.name;
    jv["domain"] = v.domain == Domain::Integer  ? "integer"
                   : v.domain == Domain::Binary ? "binary"
                                                : "continuous";
    jv["lb"] = boundToJson(v.lower);
    jv["ub"] = boundToJson(v.upper);
    vars.push_back(jv);
  }
  j["variables"] = vars;
  j["objective"] = exprToJson(m.graph(), m.objective(), m);
  json cons = json::array();
  for (const auto& c : m.constraints()) {
    // Already normalized, so every row round-trips as body <= 0.
    cons.push_back(json{{"expr", exprToJson(m.graph(), c.body, m)},
                        {"sense", "<="},
                        {"rhs", 0.0}});
  }
  j["constraints"] = cons;
  return j.dump(2);
}

void writeModelFile(const Model& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << writeModelJson(m) << "\n";
}

}  // namespace minlp
