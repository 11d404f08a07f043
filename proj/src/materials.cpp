// SPDX-License-Identifier: MIT
#include "rte/materials.hpp"

#include <cctype>
#include <cmath>
#include <memory>

#include "rte/errors.hpp"
#include "rte/quadrature.hpp"

namespace rte {

CellOptics cell_average(const MaterialField& field, int cell_id, double x0,
                        double y0, double h) {
  static std::vector<double> gn, gw;
  if (gn.empty()) gauss_legendre(3, 0.0, 1.0, gn, gw);

  CellOptics o;
  o.cell = cell_id;
  double st = 0, sa = 0, ep = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double x = x0 + gn[i] * h, y = y0 + gn[j] * h, wij = gw[i] * gw[j];
      st += wij * field.sigma_T(x, y);
      sa += wij * field.sigma_a(x, y);
      ep += wij * field.epsilon(x, y);
    }
  }
  o.sigma_T_bar = st;
  o.sigma_a_bar = sa;
  o.epsilon_bar = ep;
  if (!(o.sigma_T_bar > 0))
    throw ConfigError("cell_average: sigma_T must be positive");
  if (!(o.epsilon_bar > 0) || o.epsilon_bar > 1.0)
    throw ConfigError("cell_average: epsilon must lie in (0,1]");
  if (o.sigma_a_bar < 1e-12)
    throw DegenerateSpectrum(
        "cell_average: sigma_a < 1e-12 produces a non-decaying zero mode; "
        "not supported");
  o.Sigma_t = o.sigma_T_bar / o.epsilon_bar;
  o.Sigma_s = o.sigma_T_bar / o.epsilon_bar - o.epsilon_bar * o.sigma_a_bar;
  o.rho = o.Sigma_s / o.Sigma_t;
  return o;
}

MaterialField constant_field(double sigma_T, double sigma_a, double epsilon) {
  MaterialField f;
  f.sigma_T = [=](double, double) { return sigma_T; };
  f.sigma_a = [=](double, double) { return sigma_a; };
  f.epsilon = [=](double, double) { return epsilon; };
  f.description = "constant";
  return f;
}

MaterialField bufferzone_field() {
  MaterialField f;
  f.sigma_T = [](double x, double y) { return 1.0 + x * x + y * y; };
  f.sigma_a = [](double x, double y) { return 0.5 + x * x + y * y; };
  f.epsilon = [](double x, double) { return 0.02 * x + 0.001; };
  f.description = "bufferzone";
  return f;
}

MaterialField lattice_field(const std::vector<EpsRectangle>& rects,
                            double background_eps) {
  MaterialField f;
  f.sigma_T = [](double, double) { return 1.0; };
  f.sigma_a = [](double, double) { return 0.5; };
  auto rcopy = std::make_shared<std::vector<EpsRectangle>>(rects);
  f.epsilon = [rcopy, background_eps](double x, double y) {
    for (const auto& r : *rcopy) {
      if (x >= r.x0 && x <= r.x1 && y >= r.y0 && y <= r.y1) return r.eps;
    }
    return background_eps;
  };
  f.description = "lattice";
  return f;
}

std::vector<EpsRectangle> default_lattice_rectangles(double eps_diffusive) {
  // Checkerboard of 1/8-wide diffusive blocks over the central 6/8 of the
  // domain, center block left in the transport regime.
  std::vector<EpsRectangle> rects;
  for (int i = 1; i <= 6; ++i) {
    for (int j = 1; j <= 6; ++j) {
      if ((i + j) % 2 != 0) continue;
      if (i == 3 && j == 3) continue;  // keep a transport window at center
      if (i == 4 && j == 4) continue;
      EpsRectangle r;
      r.x0 = i / 8.0;
      r.x1 = (i + 1) / 8.0;
      r.y0 = j / 8.0;
      r.y1 = (j + 1) / 8.0;
      r.eps = eps_diffusive;
      rects.push_back(r);
    }
  }
  return rects;
}

// ---------------------------------------------------------------------------
// Expression parser: numbers, x, y, + - * / ^, unary minus, parentheses.
namespace {

struct Node {
  virtual ~Node() = default;
  virtual double eval(double x, double y) const = 0;
};
using NodePtr = std::unique_ptr<Node>;

struct Num : Node {
  double v;
  explicit Num(double v) : v(v) {}
  double eval(double, double) const override { return v; }
};
struct Var : Node {
  bool is_x;
  explicit Var(bool is_x) : is_x(is_x) {}
  double eval(double x, double y) const override { return is_x ? x : y; }
};
struct Bin : Node {
  char op;
  NodePtr a, b;
  Bin(char op, NodePtr a, NodePtr b) : op(op), a(std::move(a)), b(std::move(b)) {}
  double eval(double x, double y) const override {
    double u = a->eval(x, y), v = b->eval(x, y);
    switch (op) {
      case '+': return u + v;
      case '-': return u - v;
      case '*': return u * v;
      case '/': return u / v;
      default: return std::pow(u, v);
    }
  }
};
struct Neg : Node {
  NodePtr a;
  explicit Neg(NodePtr a) : a(std::move(a)) {}
  double eval(double x, double y) const override { return -a->eval(x, y); }
};

struct Parser {
  const std::string& t;
  size_t i = 0;
  explicit Parser(const std::string& t) : t(t) {}

  void skip() {
    while (i < t.size() && std::isspace(static_cast<unsigned char>(t[i]))) ++i;
  }
  bool eat(char ch) {
    skip();
    if (i < t.size() && t[i] == ch) {
      ++i;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw ConfigError("expression parse error at position " +
                      std::to_string(i) + ": " + msg + " in '" + t + "'");
  }

  NodePtr expr() {  // term (("+"|"-") term)*
    NodePtr n = term();
    for (;;) {
      if (eat('+')) n = std::make_unique<Bin>('+', std::move(n), term());
      else if (eat('-')) n = std::make_unique<Bin>('-', std::move(n), term());
      else return n;
    }
  }
  NodePtr term() {  // unary (("*"|"/") unary)*
    NodePtr n = unary();
    for (;;) {
      if (eat('*')) n = std::make_unique<Bin>('*', std::move(n), unary());
      else if (eat('/')) n = std::make_unique<Bin>('/', std::move(n), unary());
      else return n;
    }
  }
  NodePtr unary() {  // sign binds looser than "^": -x^2 = -(x^2)
    if (eat('-')) return std::make_unique<Neg>(unary());
    if (eat('+')) return unary();
    return power();
  }
  NodePtr power() {  // atom ("^" unary)?  (right associative)
    NodePtr n = atom();
    if (eat('^')) n = std::make_unique<Bin>('^', std::move(n), unary());
    return n;
  }
  NodePtr atom() {
    skip();
    if (i >= t.size()) fail("unexpected end of input");
    char ch = t[i];
    if (ch == '(') {
      ++i;
      NodePtr n = expr();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (ch == 'x' || ch == 'X') {
      ++i;
      return std::make_unique<Var>(true);
    }
    if (ch == 'y' || ch == 'Y') {
      ++i;
      return std::make_unique<Var>(false);
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      size_t end = 0;
      double v = std::stod(t.substr(i), &end);
      i += end;
      return std::make_unique<Num>(v);
    }
    fail("unexpected character");
  }
};

}  // namespace

std::function<double(double, double)> parse_expression(const std::string& text) {
  Parser p(text);
  std::shared_ptr<Node> root(p.expr().release());
  p.skip();
  if (p.i != text.size())
    throw ConfigError("expression parse error: trailing input in '" + text + "'");
  return [root](double x, double y) { return root->eval(x, y); };
}

}  // namespace rte
