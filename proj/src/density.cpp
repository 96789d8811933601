#include "abplab/density.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace abp {

struct DensityExpression::Node {
  enum class Kind { Number, Coordinate, Negate, Add, Subtract, Multiply, Divide, Power, Exp } kind;
  double value = 0.0;
  int coordinate = 0;
  std::shared_ptr<const Node> left, right;
};

namespace {

using Node = DensityExpression::Node;
using NodePtr = std::shared_ptr<const Node>;

std::string normalize_symbols(const std::string& text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.compare(i, 3, "\xE2\x88\x92") == 0) {  // U+2212 minus sign
      out += '-';
      i += 2;
    } else if (text.compare(i, 2, "\xC3\x97") == 0) {  // U+00D7 multiplication sign
      out += '*';
      i += 1;
    } else {
      out += text[i];
    }
  }
  return out;
}

NodePtr make(Node::Kind kind, NodePtr left = nullptr, NodePtr right = nullptr) {
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->left = std::move(left);
  node->right = std::move(right);
  return node;
}

class Parser {
 public:
  explicit Parser(std::string text) : s_(std::move(text)) {}

  NodePtr parse() {
    NodePtr root = expr();
    skip_space();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return root;
  }

  int max_coordinate = 0;

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DensityError("density expression: " + what + " at position " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr left = term();
    while (true) {
      if (accept('+')) {
        left = make(Node::Kind::Add, left, term());
      } else if (accept('-')) {
        left = make(Node::Kind::Subtract, left, term());
      } else {
        return left;
      }
    }
  }

  NodePtr term() {
    NodePtr left = unary();
    while (true) {
      if (accept('*')) {
        left = make(Node::Kind::Multiply, left, unary());
      } else if (accept('/')) {
        left = make(Node::Kind::Divide, left, unary());
      } else {
        return left;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Kind::Negate, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Node::Kind::Power, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (accept('(')) {
      NodePtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double value = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto node = std::make_shared<Node>();
      node->kind = Node::Kind::Number;
      node->value = value;
      return node;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
      const std::string word = s_.substr(pos_, end - pos_);
      if (word == "exp") {
        pos_ = end;
        if (!accept('(')) fail("expected '(' after exp");
        NodePtr arg = expr();
        if (!accept(')')) fail("expected ')'");
        return make(Node::Kind::Exp, arg);
      }
      if (word.size() == 2 && word[0] == 'x' && word[1] >= '1' && word[1] <= '4') {
        pos_ = end;
        auto node = std::make_shared<Node>();
        node->kind = Node::Kind::Coordinate;
        node->coordinate = word[1] - '1';
        max_coordinate = std::max(max_coordinate, node->coordinate + 1);
        return node;
      }
      fail("unknown identifier '" + word + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string s_;
  std::size_t pos_ = 0;
};

double eval(const Node& node, const Eigen::Ref<const Eigen::VectorXd>& x) {
  switch (node.kind) {
    case Node::Kind::Number:
      return node.value;
    case Node::Kind::Coordinate:
      return x[node.coordinate];
    case Node::Kind::Negate:
      return -eval(*node.left, x);
    case Node::Kind::Add:
      return eval(*node.left, x) + eval(*node.right, x);
    case Node::Kind::Subtract:
      return eval(*node.left, x) - eval(*node.right, x);
    case Node::Kind::Multiply:
      return eval(*node.left, x) * eval(*node.right, x);
    case Node::Kind::Divide:
      return eval(*node.left, x) / eval(*node.right, x);
    case Node::Kind::Power:
      return std::pow(eval(*node.left, x), eval(*node.right, x));
    case Node::Kind::Exp:
      return std::exp(eval(*node.left, x));
  }
  return 0.0;
}

}  // namespace

DensityExpression DensityExpression::parse(const std::string& text) {
  Parser parser(normalize_symbols(text));
  DensityExpression out;
  out.text_ = text;
  out.root_ = parser.parse();
  out.max_coordinate_ = parser.max_coordinate;
  return out;
}

double DensityExpression::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() < max_coordinate_) {
    throw DensityError("density expression uses x" + std::to_string(max_coordinate_) + " but the point has " +
                       std::to_string(x.size()) + " coordinates");
  }
  return eval(*root_, x);
}

ScalarField DensityExpression::evaluate(const Mesh& mesh) const {
  ScalarField values(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    values[v] = evaluate(mesh.vertices().row(v).transpose());
    if (!std::isfinite(values[v]) || values[v] <= 0.0) {
      std::ostringstream msg;
      msg << "density '" << text_ << "' evaluates to " << values[v] << " at vertex " << v
          << "; it must be positive everywhere";
      throw DensityError(msg.str());
    }
  }
  return values;
}

}  // namespace abp
