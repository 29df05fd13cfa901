#include <cmath>
#include <istream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "secbeam/conic.hpp"

namespace secbeam::conic {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

void check_functional(const LinearFunctional& f, const ConicProblem& p, const std::string& where) {
  for (const auto& t : f.blocks) {
    if (t.block < 0 || t.block >= static_cast<Index>(p.psd_blocks.size())) {
      throw std::invalid_argument(where + ": block index out of range");
    }
    const Index n = p.psd_blocks[static_cast<std::size_t>(t.block)];
    if (t.coef.rows() != n || t.coef.cols() != n) {
      throw std::invalid_argument(where + ": block coefficient has wrong shape");
    }
    if (!t.coef.allFinite()) throw std::invalid_argument(where + ": non-finite coefficient");
  }
  for (const auto& t : f.scalars) {
    if (t.var < 0 || t.var >= p.scalar_vars) {
      throw std::invalid_argument(where + ": scalar index out of range");
    }
    if (!std::isfinite(t.coef)) throw std::invalid_argument(where + ": non-finite coefficient");
  }
  if (!std::isfinite(f.constant)) throw std::invalid_argument(where + ": non-finite constant");
}

struct ColumnLayout {
  std::vector<Index> block_offset;
  Index scalar_offset = 0;
  Index n = 0;
};

ColumnLayout layout_of(const ConicProblem& p) {
  ColumnLayout l;
  Index off = 0;
  for (Index d : p.psd_blocks) {
    l.block_offset.push_back(off);
    off += svec_size(d);
  }
  l.scalar_offset = off;
  l.n = off + p.scalar_vars;
  return l;
}

// Row vector r with r'x = f(x) - f.constant.
RealVector row_of(const LinearFunctional& f, const ConicProblem& p, const ColumnLayout& l) {
  RealVector r = RealVector::Zero(l.n);
  for (const auto& t : f.blocks) {
    const Index n = p.psd_blocks[static_cast<std::size_t>(t.block)];
    const RealMatrix sym = 0.5 * (t.coef + t.coef.transpose());
    r.segment(l.block_offset[static_cast<std::size_t>(t.block)], svec_size(n)) += svec(sym);
  }
  for (const auto& t : f.scalars) r(l.scalar_offset + t.var) += t.coef;
  return r;
}

}  // namespace

Index svec_size(Index n) { return n * (n + 1) / 2; }

RealVector svec(const RealMatrix& m) {
  const Index n = m.rows();
  RealVector v(svec_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    v(k++) = m(j, j);
    for (Index i = j + 1; i < n; ++i) v(k++) = kSqrt2 * 0.5 * (m(i, j) + m(j, i));
  }
  return v;
}

RealMatrix smat(const Eigen::Ref<const RealVector>& v, Index n) {
  if (v.size() != svec_size(n)) throw DimensionError("smat: length does not match dimension");
  RealMatrix m(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    m(j, j) = v(k++);
    for (Index i = j + 1; i < n; ++i) {
      m(i, j) = v(k++) / kSqrt2;
      m(j, i) = m(i, j);
    }
  }
  return m;
}

double LinearFunctional::evaluate(const std::vector<RealMatrix>& block_values,
                                  const RealVector& scalar_values) const {
  double v = constant;
  for (const auto& t : blocks) {
    v += (t.coef.array() * block_values.at(static_cast<std::size_t>(t.block)).array()).sum();
  }
  for (const auto& t : scalars) v += t.coef * scalar_values(t.var);
  return v;
}

void ConicProblem::add_rotated_soc(const LinearFunctional& w, const LinearFunctional& x,
                                   const LinearFunctional& y, std::string label) {
  auto combine = [](const LinearFunctional& a, double sa, const LinearFunctional& b, double sb) {
    LinearFunctional f;
    for (const auto& t : a.blocks) f.add_block(t.block, sa * t.coef);
    for (const auto& t : b.blocks) f.add_block(t.block, sb * t.coef);
    for (const auto& t : a.scalars) f.add_scalar(t.var, sa * t.coef);
    for (const auto& t : b.scalars) f.add_scalar(t.var, sb * t.coef);
    f.constant = sa * a.constant + sb * b.constant;
    return f;
  };
  add_soc({w, combine(x, 0.5, y, -0.5)}, combine(x, 0.5, y, 0.5), std::move(label));
}

void ConicProblem::validate() const {
  for (Index d : psd_blocks) {
    if (d < 1) throw std::invalid_argument("ConicProblem: PSD block dimension must be >= 1");
  }
  if (scalar_vars < 0) throw std::invalid_argument("ConicProblem: negative scalar count");
  if (psd_blocks.empty() && scalar_vars == 0) {
    throw std::invalid_argument("ConicProblem: no variables");
  }
  check_functional(objective, *this, "objective");
  for (const auto& e : equalities) check_functional(e.lhs, *this, "equality '" + e.label + "'");
  for (const auto& e : inequalities) check_functional(e.lhs, *this, "inequality '" + e.label + "'");
  for (const auto& c : socs) {
    if (c.vector.empty()) throw std::invalid_argument("SOC '" + c.label + "' has an empty vector part");
    for (const auto& f : c.vector) check_functional(f, *this, "SOC '" + c.label + "'");
    check_functional(c.bound, *this, "SOC '" + c.label + "'");
  }
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

std::string describe_failure(const std::string& context, const ConicSolution& sol) {
  std::ostringstream msg;
  msg << context << ": solver returned " << to_string(sol.status) << " after " << sol.iterations
      << " iterations (" << sol.message << ")";
  if (!sol.history.empty()) {
    const auto& last = sol.history.back();
    msg << "; last iterate: pres " << last.primal_residual << ", dres " << last.dual_residual
        << ", gap " << last.gap << ", step " << last.step;
  }
  return msg.str();
}

}  // namespace

SolveError::SolveError(const std::string& context, const ConicSolution& sol)
    : NumericalError(describe_failure(context, sol)), status_(sol.status), history_(sol.history) {}

StandardForm compile(const ConicProblem& p) {
  p.validate();
  const ColumnLayout l = layout_of(p);
  StandardForm sf;
  sf.c = row_of(p.objective, p, l);
  sf.objective_offset = p.objective.constant;

  const auto n_eq = static_cast<Index>(p.equalities.size());
  sf.a.resize(n_eq, l.n);
  sf.b.resize(n_eq);
  for (Index i = 0; i < n_eq; ++i) {
    const auto& e = p.equalities[static_cast<std::size_t>(i)];
    sf.a.row(i) = row_of(e.lhs, p, l).transpose();
    sf.b(i) = e.rhs - e.lhs.constant;
  }

  Index rows = static_cast<Index>(p.inequalities.size());
  for (const auto& c : p.socs) rows += 1 + static_cast<Index>(c.vector.size());
  sf.g.resize(rows, l.n);
  sf.h.resize(rows);
  sf.nonneg = static_cast<Index>(p.inequalities.size());

  Index r = 0;
  for (const auto& e : p.inequalities) {
    // s = h - G x >= 0
    const RealVector row = row_of(e.lhs, p, l);
    if (e.sense == Sense::GreaterEqual) {
      sf.g.row(r) = -row.transpose();
      sf.h(r) = e.lhs.constant - e.rhs;
    } else {
      sf.g.row(r) = row.transpose();
      sf.h(r) = e.rhs - e.lhs.constant;
    }
    ++r;
  }
  for (const auto& c : p.socs) {
    sf.soc.push_back(1 + static_cast<Index>(c.vector.size()));
    sf.g.row(r) = -row_of(c.bound, p, l).transpose();
    sf.h(r) = c.bound.constant;
    ++r;
    for (const auto& f : c.vector) {
      sf.g.row(r) = -row_of(f, p, l).transpose();
      sf.h(r) = f.constant;
      ++r;
    }
  }
  sf.psd = p.psd_blocks;
  return sf;
}

namespace {

void write_matrix(std::ostream& out, const std::string& name, const RealMatrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
    out << '\n';
  }
}

RealMatrix read_matrix(std::istream& in, const std::string& name) {
  std::string tag;
  Index rows = 0, cols = 0;
  if (!(in >> tag >> rows >> cols) || tag != name) {
    throw std::runtime_error("read_standard_form: expected section '" + name + "'");
  }
  RealMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) throw std::runtime_error("read_standard_form: truncated " + name);
    }
  }
  return m;
}

}  // namespace

void write_standard_form(std::ostream& out, const StandardForm& sf) {
  const auto old_precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "conic n " << sf.c.size() << " p " << sf.a.rows() << " m " << sf.g.rows()
      << " offset " << sf.objective_offset << '\n';
  out << "nonneg " << sf.nonneg << '\n';
  out << "soc " << sf.soc.size();
  for (Index d : sf.soc) out << ' ' << d;
  out << '\n' << "psd " << sf.psd.size();
  for (Index d : sf.psd) out << ' ' << d;
  out << '\n';
  write_matrix(out, "c", sf.c.transpose());
  write_matrix(out, "A", sf.a);
  write_matrix(out, "b", sf.b.transpose());
  write_matrix(out, "G", sf.g);
  write_matrix(out, "h", sf.h.transpose());
  out.precision(old_precision);
}

StandardForm read_standard_form(std::istream& in) {
  StandardForm sf;
  std::string tag;
  Index n = 0, p = 0, m = 0;
  std::string tn, tp, tm, to;
  if (!(in >> tag >> tn >> n >> tp >> p >> tm >> m >> to >> sf.objective_offset) || tag != "conic") {
    throw std::runtime_error("read_standard_form: bad header");
  }
  if (!(in >> tag >> sf.nonneg) || tag != "nonneg") {
    throw std::runtime_error("read_standard_form: expected 'nonneg'");
  }
  auto read_list = [&](const std::string& name) {
    std::size_t count = 0;
    if (!(in >> tag >> count) || tag != name) {
      throw std::runtime_error("read_standard_form: expected '" + name + "'");
    }
    std::vector<Index> dims(count);
    for (auto& d : dims) in >> d;
    return dims;
  };
  sf.soc = read_list("soc");
  sf.psd = read_list("psd");
  sf.c = read_matrix(in, "c").transpose();
  sf.a = read_matrix(in, "A");
  sf.b = read_matrix(in, "b").transpose();
  sf.g = read_matrix(in, "G");
  sf.h = read_matrix(in, "h").transpose();
  if (sf.c.size() != n || sf.a.rows() != p || sf.g.rows() != m) {
    throw std::runtime_error("read_standard_form: header does not match sections");
  }
  return sf;
}

}  // namespace secbeam::conic
