#include <cctype>
#include <cmath>
#include <ostream>
#include <string>

#include "gridplan/simplex.hpp"

namespace gridplan::lp {

namespace {

// LP-format identifiers may not start with a digit or contain most punctuation.
std::string sanitize(const std::string& raw, char prefix, int index) {
  if (raw.empty()) return std::string(1, prefix) + std::to_string(index);
  std::string out;
  for (char c : raw) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.') {
    out.insert(out.begin(), prefix);
  }
  return out;
}

void write_terms(std::ostream& out, const std::vector<std::pair<double, std::string>>& terms) {
  if (terms.empty()) {
    out << " 0";
    return;
  }
  int on_line = 0;
  for (const auto& [coef, name] : terms) {
    out << (coef < 0 ? " - " : " + ") << std::abs(coef) << ' ' << name;
    if (++on_line % 8 == 0) out << "\n  ";
  }
}

}  // namespace

void write_lp_format(const LinearProgram& lp, std::ostream& out, const std::vector<int>& binary_cols) {
  std::vector<std::string> names(static_cast<std::size_t>(lp.n_vars));
  for (int j = 0; j < lp.n_vars; ++j) {
    const std::string raw = j < static_cast<int>(lp.col_names.size()) ? lp.col_names[j] : "";
    names[j] = sanitize(raw, 'x', j) + (raw.empty() ? "" : "_" + std::to_string(j));
  }
  const auto old_prec = out.precision(17);

  out << "\\ written by gridplan\nMinimize\n obj:";
  std::vector<std::pair<double, std::string>> terms;
  for (int j = 0; j < lp.n_vars; ++j) {
    if (lp.objective[j] != 0.0) terms.emplace_back(lp.objective[j], names[j]);
  }
  write_terms(out, terms);
  out << "\nSubject To\n";
  for (int i = 0; i < lp.n_rows(); ++i) {
    const auto& row = lp.rows[static_cast<std::size_t>(i)];
    out << ' ' << sanitize(row.name, 'r', i) << "_" << i << ':';
    terms.clear();
    for (const auto& t : row.terms) terms.emplace_back(t.coef, names[t.col]);
    write_terms(out, terms);
    switch (row.relation) {
      case Relation::LessEqual: out << " <= "; break;
      case Relation::GreaterEqual: out << " >= "; break;
      case Relation::Equal: out << " = "; break;
    }
    out << row.rhs << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.n_vars; ++j) {
    const double lo = lp.lower[j], hi = lp.upper[j];
    if (lo == -kInf && hi == kInf) {
      out << ' ' << names[j] << " free\n";
    } else if (lo == hi) {
      out << ' ' << names[j] << " = " << lo << '\n';
    } else {
      out << ' ';
      if (lo == -kInf) out << "-inf";
      else out << lo;
      out << " <= " << names[j] << " <= ";
      if (hi == kInf) out << "+inf";
      else out << hi;
      out << '\n';
    }
  }
  if (!binary_cols.empty()) {
    out << "Binaries\n";
    for (int j : binary_cols) out << ' ' << names[j] << '\n';
  }
  out << "End\n";
  out.precision(old_prec);
}

}  // namespace gridplan::lp
