#include "sngp/checkpoint.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace sngp {

namespace {

constexpr const char* kMagic = "SNGP-CHECKPOINT";

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %.17g", v);
    out_ << buf;
  }

  void vector(const char* name, std::span<const double> v) {
    out_ << name << ' ' << v.size();
    for (double x : v) value(x);
    out_ << '\n';
  }

  void matrix(const char* name, const Matrix& m) {
    out_ << name << ' ' << m.rows() << ' ' << m.cols();
    for (double x : m.flat()) value(x);
    out_ << '\n';
  }

  void layer(const char* name, const DenseLayer& l) {
    out_ << "layer " << name << '\n';
    matrix("weight", l.weight);
    vector("bias", l.bias);
    vector("sn_u", l.sn_u);
    out_ << "sn_bound";
    value(l.sn_bound);
    out_ << '\n';
  }

  std::ostream& out() { return out_; }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string token() {
    std::string t;
    if (!(in_ >> t)) fail("unexpected end of file");
    return t;
  }

  void expect(const std::string& want) {
    const std::string got = token();
    if (got != want) fail("expected '" + want + "', found '" + got + "'");
  }

  double real() {
    const std::string t = token();
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0' || errno == ERANGE) fail("bad number '" + t + "'");
    return v;
  }

  std::size_t count() {
    const std::string t = token();
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) fail("bad count '" + t + "'");
    return static_cast<std::size_t>(std::stoull(t));
  }

  bool flag() {
    const std::string t = token();
    if (t == "1") return true;
    if (t == "0") return false;
    fail("bad flag '" + t + "'");
    return false;
  }

  Vector vector(const std::string& name) {
    expect(name);
    const std::size_t n = count();
    Vector v(n);
    for (double& x : v) x = real();
    return v;
  }

  Matrix matrix(const std::string& name) {
    expect(name);
    const std::size_t r = count();
    const std::size_t c = count();
    Vector v(r * c);
    for (double& x : v) x = real();
    return Matrix(r, c, std::move(v));
  }

  DenseLayer layer(const std::string& name) {
    expect("layer");
    expect(name);
    DenseLayer l;
    l.weight = matrix("weight");
    l.bias = vector("bias");
    l.sn_u = vector("sn_u");
    expect("sn_bound");
    l.sn_bound = real();
    if (l.bias.size() != l.weight.rows()) fail("layer " + name + ": bias size mismatch");
    return l;
  }

  std::istream& in() { return in_; }

  [[noreturn]] void fail(const std::string& msg) { throw CheckpointError("checkpoint: " + msg); }

 private:
  std::istream& in_;
};

void write_model(Writer& w, const SngpModel& m) {
  auto& out = w.out();
  out << "variant " << to_string(m.variant) << '\n';
  out << "num_classes " << m.num_classes << '\n';
  out << "input_dim " << m.input_dim << '\n';
  out << "identity_hidden " << (m.identity_hidden ? 1 : 0) << '\n';
  out << "spectral_norm " << (m.spectral_norm_enabled ? 1 : 0) << '\n';
  out << "head " << to_string(m.head) << '\n';

  const ResFfnNetwork& net = m.network;
  out << "network " << net.depth() << ' ' << (net.train_input_projection ? 1 : 0) << '\n';
  w.layer("input_projection", net.input_projection);
  for (const auto& b : net.blocks) {
    out << "block " << to_string(b.activation);
    w.value(b.dropout_rate);
    out << '\n';
    w.layer("residual", b.layer);
  }

  if (m.head == HeadKind::gp) {
    const RffGpLayer& gp = m.gp;
    out << "gp " << gp.input_dim << ' ' << (gp.layer_norm ? 1 : 0) << ' ' << (gp.shared_precision ? 1 : 0) << ' '
        << gp.precision.size();
    w.value(gp.length_scale);
    w.value(gp.ridge);
    w.value(gp.discount);
    out << '\n';
    w.matrix("w_fixed", gp.w_fixed);
    w.vector("b_fixed", gp.b_fixed);
    w.matrix("beta", gp.beta);
    out << "projection " << (gp.projection ? 1 : 0) << '\n';
    if (gp.projection) w.matrix("projection_weight", *gp.projection);
    for (const auto& p : gp.precision) w.matrix("precision", p);
  } else {
    w.layer("dense_head", m.dense);
  }
  out << "end_member\n";
}

SngpModel read_model(Reader& r) {
  SngpModel m;
  r.expect("variant");
  try {
    m.variant = parse_variant(r.token());
  } catch (const ContractError& e) {
    r.fail(e.what());
  }
  r.expect("num_classes");
  m.num_classes = r.count();
  r.expect("input_dim");
  m.input_dim = r.count();
  r.expect("identity_hidden");
  m.identity_hidden = r.flag();
  r.expect("spectral_norm");
  m.spectral_norm_enabled = r.flag();
  r.expect("head");
  const std::string head = r.token();
  if (head == "gp") m.head = HeadKind::gp;
  else if (head == "dense") m.head = HeadKind::dense;
  else r.fail("unknown head '" + head + "'");

  r.expect("network");
  const std::size_t depth = r.count();
  m.network.train_input_projection = r.flag();
  m.network.input_projection = r.layer("input_projection");
  for (std::size_t i = 0; i < depth; ++i) {
    r.expect("block");
    ResidualBlock b;
    try {
      b.activation = parse_activation(r.token());
    } catch (const ContractError& e) {
      r.fail(e.what());
    }
    b.dropout_rate = r.real();
    b.layer = r.layer("residual");
    m.network.blocks.push_back(std::move(b));
  }

  if (m.head == HeadKind::gp) {
    r.expect("gp");
    RffGpLayer& gp = m.gp;
    gp.input_dim = r.count();
    gp.layer_norm = r.flag();
    gp.shared_precision = r.flag();
    const std::size_t n_prec = r.count();
    gp.length_scale = r.real();
    gp.ridge = r.real();
    gp.discount = r.real();
    gp.w_fixed = r.matrix("w_fixed");
    gp.b_fixed = r.vector("b_fixed");
    gp.beta = r.matrix("beta");
    r.expect("projection");
    if (r.flag()) gp.projection = r.matrix("projection_weight");
    for (std::size_t k = 0; k < n_prec; ++k) gp.precision.push_back(r.matrix("precision"));
    const std::size_t d = gp.w_fixed.rows();
    if (gp.b_fixed.size() != d || gp.beta.cols() != d || gp.beta.rows() != m.num_classes)
      r.fail("GP layer shapes are inconsistent");
    for (const auto& p : gp.precision)
      if (p.rows() != d || p.cols() != d) r.fail("precision matrix has the wrong shape");
    if (n_prec != (gp.shared_precision ? 1 : m.num_classes)) r.fail("wrong number of precision matrices");
  } else {
    m.dense = r.layer("dense_head");
    if (m.dense.weight.rows() != m.num_classes) r.fail("dense head has the wrong number of classes");
  }
  r.expect("end_member");
  return m;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << kMagic << ' ' << kCheckpointVersion << '\n';
  const auto echo = config_echo(ckpt.config);
  out << "config " << echo.size() << '\n';
  for (const auto& line : echo) out << line << '\n';
  out << "members " << ckpt.members.size() << '\n';
  Writer w(out);
  for (std::size_t i = 0; i < ckpt.members.size(); ++i) {
    out << "member " << i << '\n';
    write_model(w, ckpt.members[i]);
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  if (r.token() != kMagic) r.fail("not a checkpoint file");
  const std::size_t version = r.count();
  if (version != static_cast<std::size_t>(kCheckpointVersion))
    r.fail("unsupported version " + std::to_string(version));
  r.expect("config");
  const std::size_t lines = r.count();
  std::string line;
  std::getline(in, line);  // rest of the "config" line
  std::string text;
  for (std::size_t i = 0; i < lines; ++i) {
    if (!std::getline(in, line)) r.fail("truncated config block");
    text += line + "\n";
  }
  Checkpoint ckpt;
  try {
    ckpt.config = parse_config_string(text);
  } catch (const ConfigError& e) {
    r.fail(std::string("config block: ") + e.what());
  }
  r.expect("members");
  const std::size_t n = r.count();
  for (std::size_t i = 0; i < n; ++i) {
    r.expect("member");
    if (r.count() != i) r.fail("members out of order");
    ckpt.members.push_back(read_model(r));
  }
  r.expect("end");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ostringstream buf;
  write_checkpoint(buf, ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open for writing: " + path);
  out << buf.str();
  if (!out) throw CheckpointError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  return read_checkpoint(in);
}

}  // namespace sngp
