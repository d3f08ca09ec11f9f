#include "unext/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace unext::quantum {

namespace {

using linalg::embed_with_identity;
using linalg::ket;
using linalg::kron;
using linalg::min_eigenvalue;
using linalg::partial_trace;
using linalg::partial_trace_raw;
using linalg::partial_transpose;
using linalg::reduced_shape;
using linalg::subsystem_index_permutation;

std::vector<std::string> concat(std::vector<std::string> a,
                                const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

SubsystemShape shape_of(const std::vector<int>& dims,
                        const std::vector<std::string>& labels) {
  SubsystemShape s;
  s.dims = dims;
  s.labels = labels;
  s.check_unique();
  return s;
}

// Reorders a general matrix from `from` factor order to `to_order`.
Mat permute_raw(const Mat& m, const SubsystemShape& from,
                const std::vector<std::string>& to_order) {
  std::vector<int> p = subsystem_index_permutation(from, to_order);
  Mat out(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out(p[r], p[c]) = m(r, c);
  return out;
}

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// d_out x d_in isometry onto the first d_in basis vectors.
Mat embed_isometry(int d_in, int d_out) {
  Mat v = Mat::Zero(d_out, d_in);
  for (int i = 0; i < d_in; ++i) v(i, i) = 1.0;
  return v;
}

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidProbability(what);
}

}  // namespace

Mat unnormalized_max_entangled(int d) {
  if (d < 1) throw DimensionMismatch("maximally entangled: d must be >= 1");
  Mat g = Mat::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i * d + i, j * d + j) = 1.0;
  return g;
}

std::vector<std::string> ChoiChannel::output_labels() const {
  std::vector<std::string> out;
  for (const auto& l : shape.labels)
    if (std::find(inputs.begin(), inputs.end(), l) == inputs.end())
      out.push_back(l);
  return out;
}

SubsystemShape ChoiChannel::input_shape() const {
  return reduced_shape(shape, inputs);
}

SubsystemShape ChoiChannel::output_shape() const {
  return reduced_shape(shape, output_labels());
}

int ChoiChannel::in_dim() const { return input_shape().total_dim(); }

int ChoiChannel::out_dim() const { return output_shape().total_dim(); }

double ChoiChannel::psd_residual() const {
  return std::max(0.0, -min_eigenvalue(choi));
}

double ChoiChannel::tp_residual() const {
  HermitianMatrix marg = partial_trace(choi, shape, inputs);
  return max_abs(marg.mat() - Mat::Identity(in_dim(), in_dim()));
}

void ChoiChannel::validate() const {
  shape.check_against(choi);
  shape.check_unique();
  if (inputs.empty() || inputs.size() >= shape.labels.size())
    throw InvalidChannel("channel needs at least one input and one output");
  for (size_t i = 0; i < inputs.size(); ++i)
    if (shape.labels[i] != inputs[i])
      throw InvalidChannel("choi subsystems must be ordered inputs first");
  if (psd_residual() > trace_tol)
    throw InvalidChannel("choi operator is not positive semidefinite");
  HermitianMatrix marg = partial_trace(choi, shape, inputs);
  Mat gap = marg.mat() - Mat::Identity(in_dim(), in_dim());
  if (cp_only) {
    if (min_eigenvalue(HermitianMatrix(-gap, 1e-7)) < -trace_tol)
      throw InvalidChannel("instrument branch increases trace");
  } else if (max_abs(gap) > trace_tol) {
    throw InvalidChannel("channel is not trace preserving");
  }
}

ChoiChannel channel_from_choi(const Mat& choi, int d_in, int d_out,
                              double trace_tol) {
  ChoiChannel ch;
  ch.choi = HermitianMatrix(choi, 1e-8);
  ch.shape = shape_of({d_in, d_out}, {"A", "B"});
  ch.inputs = {"A"};
  ch.trace_tol = trace_tol;
  ch.validate();
  return ch;
}

ChoiChannel choi_from_kraus(const std::vector<Mat>& kraus, int d_in, int d_out,
                            double trace_tol) {
  if (kraus.empty()) throw DimensionMismatch("empty Kraus set");
  Mat g = Mat::Zero(d_in * d_out, d_in * d_out);
  Mat ksum = Mat::Zero(d_in, d_in);
  for (const Mat& k : kraus) {
    if (k.rows() != d_out || k.cols() != d_in)
      throw DimensionMismatch("Kraus operator has wrong dimensions");
    // (id (x) K) Gamma (id (x) K)^dag entry-wise: block (i,j) is K|i><j|K^dag.
    for (int i = 0; i < d_in; ++i)
      for (int j = 0; j < d_in; ++j)
        g.block(i * d_out, j * d_out, d_out, d_out) +=
            k.col(i) * k.col(j).adjoint();
    ksum += k.adjoint() * k;
  }
  ChoiChannel ch;
  ch.choi = HermitianMatrix(g, 1e-8);
  ch.shape = shape_of({d_in, d_out}, {"A", "B"});
  ch.inputs = {"A"};
  ch.trace_tol = trace_tol;
  ch.cp_only = max_abs(ksum - Mat::Identity(d_in, d_in)) > trace_tol;
  ch.validate();
  return ch;
}

ChoiChannel make_identity(int d) {
  return channel_from_choi(unnormalized_max_entangled(d), d, d);
}

ChoiChannel make_erasure(int d, double p) {
  require_probability(p, "erasure probability outside [0,1]");
  Mat v = embed_isometry(d, d + 1);
  ChoiChannel embed = choi_from_kraus({v}, d, d + 1);
  Mat flag = ket(d + 1, d) * ket(d + 1, d).adjoint();
  Mat g = (1.0 - p) * embed.choi.mat() + p * kron(Mat::Identity(d, d), flag);
  return channel_from_choi(g, d, d + 1);
}

ChoiChannel make_depolarizing(int d, double p) {
  double pmax = static_cast<double>(d * d) / (d * d - 1);
  if (!(p >= 0.0 && p <= pmax))
    throw InvalidProbability("depolarizing parameter outside CPTP range");
  Mat g = (1.0 - p) * unnormalized_max_entangled(d) +
          (p / d) * Mat::Identity(d * d, d * d);
  return channel_from_choi(g, d, d);
}

ChoiChannel make_replacer(int d_in, const HermitianMatrix& sigma) {
  if (std::abs(sigma.trace() - 1.0) > 1e-8)
    throw InvalidChannel("replacer target must have unit trace");
  return channel_from_choi(kron(Mat::Identity(d_in, d_in), sigma.mat()), d_in,
                           sigma.dim());
}

ChoiChannel tensor_channel(const ChoiChannel& n1, const ChoiChannel& n2) {
  auto suffixed = [](const std::vector<std::string>& ls, const char* sfx) {
    std::vector<std::string> out;
    for (const auto& l : ls) out.push_back(l + sfx);
    return out;
  };
  SubsystemShape prod;
  prod.dims = n1.shape.dims;
  prod.dims.insert(prod.dims.end(), n2.shape.dims.begin(),
                   n2.shape.dims.end());
  prod.labels = concat(suffixed(n1.shape.labels, "1"),
                       suffixed(n2.shape.labels, "2"));
  Mat big = kron(n1.choi.mat(), n2.choi.mat());
  std::vector<std::string> ins =
      concat(suffixed(n1.inputs, "1"), suffixed(n2.inputs, "2"));
  std::vector<std::string> order =
      concat(concat(ins, suffixed(n1.output_labels(), "1")),
             suffixed(n2.output_labels(), "2"));
  ChoiChannel ch;
  ch.choi = HermitianMatrix(permute_raw(big, prod, order), 1e-8);
  SubsystemShape sh;
  for (const auto& l : order) {
    sh.labels.push_back(l);
    sh.dims.push_back(prod.dim_of(l));
  }
  ch.shape = sh;
  ch.inputs = ins;
  ch.trace_tol = std::max(n1.trace_tol, n2.trace_tol);
  ch.cp_only = n1.cp_only || n2.cp_only;
  ch.validate();
  return ch;
}

LabeledOperator apply_channel_labeled(const ChoiChannel& ch,
                                      const HermitianMatrix& state,
                                      const SubsystemShape& shape,
                                      const std::vector<std::string>& on) {
  shape.check_against(state);
  ch.validate();
  if (on.size() != ch.inputs.size())
    throw DimensionMismatch("channel input count does not match target labels");
  for (size_t i = 0; i < on.size(); ++i) {
    if (shape.dim_of(on[i]) != ch.shape.dim_of(ch.inputs[i]))
      throw DimensionMismatch("channel input dimension does not match target");
    for (size_t k = 0; k < i; ++k)
      if (on[i] == on[k]) throw DimensionMismatch("repeated target label");
  }

  std::vector<std::string> rest;
  for (const auto& l : shape.labels)
    if (std::find(on.begin(), on.end(), l) == on.end()) rest.push_back(l);
  std::vector<std::string> outs = ch.output_labels();
  for (const auto& l : outs)
    if (std::find(rest.begin(), rest.end(), l) != rest.end())
      throw DimensionMismatch("channel output label collides with state label");

  // Temporary output names that cannot collide with the state labels.
  std::vector<std::string> tmp;
  for (size_t i = 0; i < outs.size(); ++i)
    tmp.push_back("#out" + std::to_string(i));

  SubsystemShape big = shape;
  SubsystemShape ch_shape = ch.shape;
  ch_shape.labels = concat(on, tmp);
  for (size_t i = 0; i < tmp.size(); ++i) {
    big.labels.push_back(tmp[i]);
    big.dims.push_back(ch.output_shape().dims[i]);
  }
  big.check_unique();

  HermitianMatrix rho_emb = embed_with_identity(state, shape.labels, big);
  HermitianMatrix gam_emb = embed_with_identity(ch.choi, ch_shape.labels, big);
  HermitianMatrix rho_pt = partial_transpose(rho_emb, big, on);
  Mat prod = rho_pt.mat() * gam_emb.mat();
  Mat out_raw = partial_trace_raw(prod, big, concat(rest, tmp));

  LabeledOperator out;
  out.op = HermitianMatrix(out_raw, 1e-8);
  SubsystemShape out_shape = reduced_shape(big, concat(rest, tmp));
  for (size_t i = 0; i < tmp.size(); ++i)
    out_shape.labels[rest.size() + i] = outs[i];
  out.shape = out_shape;
  return out;
}

HermitianMatrix apply_channel(const ChoiChannel& ch,
                              const HermitianMatrix& state,
                              const SubsystemShape& shape,
                              const std::vector<std::string>& on) {
  return apply_channel_labeled(ch, state, shape, on).op;
}

int BipartiteChannel::dA() const { return ch.shape.dim_of("A"); }
int BipartiteChannel::dB() const { return ch.shape.dim_of("B"); }
int BipartiteChannel::dAp() const { return ch.shape.dim_of("Ap"); }
int BipartiteChannel::dBp() const { return ch.shape.dim_of("Bp"); }

double BipartiteChannel::semicausal_residual() const {
  HermitianMatrix lhs = partial_trace(ch.choi, ch.shape, {"A", "B", "Ap"});
  SubsystemShape lhs_shape = reduced_shape(ch.shape, {"A", "B", "Ap"});
  HermitianMatrix marg = partial_trace(ch.choi, ch.shape, {"A", "Ap"});
  HermitianMatrix rhs = embed_with_identity(marg, {"A", "Ap"}, lhs_shape);
  return max_abs(lhs.mat() - rhs.mat() / dB());
}

BipartiteChannel bipartite_from_choi(const Mat& choi, int dA, int dB, int dAp,
                                     int dBp, double trace_tol) {
  BipartiteChannel bc;
  bc.ch.choi = HermitianMatrix(choi, 1e-8);
  bc.ch.shape = shape_of({dA, dB, dAp, dBp}, {"A", "B", "Ap", "Bp"});
  bc.ch.inputs = {"A", "B"};
  bc.ch.trace_tol = trace_tol;
  bc.ch.validate();
  return bc;
}

BipartiteChannel check_semicausal(BipartiteChannel ch, double tol) {
  if (ch.semicausal_residual() > tol)
    throw InvalidChannel("channel signals from the B side to the A side");
  ch.semicausal_checked = true;
  return ch;
}

BipartiteChannel make_semicausal_erasure(int d, double p) {
  require_probability(p, "erasure probability outside [0,1]");
  Mat gembed = choi_from_kraus({embed_isometry(d, d + 1)}, d, d + 1).choi.mat();
  Mat flag = ket(d + 1, d) * ket(d + 1, d).adjoint();
  // Terms live on (A, Ap, Bp) with the trivial B factor implicit.
  Mat keep_side = kron(gembed, flag);  // (A, Ap) (x) flag on Bp
  SubsystemShape swapped = shape_of({d, d + 1, d + 1}, {"A", "Bp", "Ap"});
  Mat send_side = permute_raw(kron(gembed, flag), swapped, {"A", "Ap", "Bp"});
  Mat g = p * keep_side + (1.0 - p) * send_side;
  return check_semicausal(bipartite_from_choi(g, d, 1, d + 1, d + 1));
}

BipartiteChannel make_flagged_erasure(int d, double p, double q) {
  require_probability(p, "erasure probability outside [0,1]");
  require_probability(q, "flag depolarizing parameter outside [0,1]");
  auto flag_state = [q](int bit) -> Mat {
    Mat pure = ket(2, bit) * ket(2, bit).adjoint();
    return (1.0 - q) * pure + q * 0.5 * Mat::Identity(2, 2);
  };
  Mat gembed = choi_from_kraus({embed_isometry(d, d + 1)}, d, d + 1).choi.mat();
  Mat erased = ket(d + 1, d) * ket(d + 1, d).adjoint();
  // Terms live on (A, Ap, Bp) with the trivial B factor implicit.
  SubsystemShape swapped = shape_of({d, d + 1, 2}, {"A", "Bp", "Ap"});
  Mat pass =
      permute_raw(kron(gembed, flag_state(1)), swapped, {"A", "Ap", "Bp"});
  Mat drop = kron(Mat::Identity(d, d), kron(flag_state(0), erased));
  Mat g = (1.0 - p) * pass + p * drop;
  return check_semicausal(bipartite_from_choi(g, d, 1, 2, d + 1));
}

int SuperchannelChoi::dim_a() const {
  return reduced_shape(shape, a_labels).total_dim();
}
int SuperchannelChoi::dim_d() const {
  return reduced_shape(shape, d_labels).total_dim();
}
int SuperchannelChoi::dim_c() const {
  return reduced_shape(shape, c_labels).total_dim();
}
int SuperchannelChoi::dim_b() const {
  return reduced_shape(shape, b_labels).total_dim();
}

void SuperchannelChoi::check_layout() const {
  shape.check_against(choi);
  shape.check_unique();
  std::vector<std::string> expect =
      concat(concat(a_labels, d_labels), concat(c_labels, b_labels));
  if (shape.labels != expect)
    throw InvalidSuperchannel(
        "superchannel subsystems must be ordered (a, d, c, b)");
  if (a_labels.empty() || d_labels.empty() || c_labels.empty() ||
      b_labels.empty())
    throw InvalidSuperchannel("superchannel role groups must be nonempty");
}

double SuperchannelReport::worst() const {
  return std::max({psd_residual, tp_residual, nonsignaling_residual});
}

bool SuperchannelReport::ok(double tol) const { return worst() <= tol; }

SuperchannelReport validate_superchannel(const SuperchannelChoi& s) {
  s.check_layout();
  SuperchannelReport rep;
  rep.psd_residual = std::max(0.0, -min_eigenvalue(s.choi));

  std::vector<std::string> cb = concat(s.c_labels, s.b_labels);
  HermitianMatrix marg = partial_trace(s.choi, s.shape, cb);
  int dcb = s.dim_c() * s.dim_b();
  rep.tp_residual = max_abs(marg.mat() - Mat::Identity(dcb, dcb));

  std::vector<std::string> acb = concat(concat(s.a_labels, s.c_labels),
                                        s.b_labels);
  HermitianMatrix lhs = partial_trace(s.choi, s.shape, acb);
  SubsystemShape lhs_shape = reduced_shape(s.shape, acb);
  std::vector<std::string> ac = concat(s.a_labels, s.c_labels);
  HermitianMatrix ac_marg = partial_trace(s.choi, s.shape, ac);
  HermitianMatrix rhs = embed_with_identity(ac_marg, ac, lhs_shape);
  rep.nonsignaling_residual = max_abs(lhs.mat() - rhs.mat() / s.dim_b());
  return rep;
}

ChoiChannel superchannel_apply(const SuperchannelChoi& theta,
                               const ChoiChannel& n) {
  SuperchannelReport rep = validate_superchannel(theta);
  if (!rep.ok(1e-7))
    throw InvalidSuperchannel("superchannel constraints violated");
  if (n.cp_only)
    throw InvalidChannel("superchannel argument must be trace preserving");
  n.validate();
  if (n.in_dim() != theta.dim_a() || n.out_dim() != theta.dim_b())
    throw linalg::ShapeMismatch("argument channel does not fit superchannel");

  // Reinterpret the argument Choi on the superchannel's (a, b) factors; the
  // inputs-first storage makes the flat bases compatible.
  std::vector<std::string> ab = concat(theta.a_labels, theta.b_labels);
  HermitianMatrix gam_emb =
      embed_with_identity(n.choi, ab, theta.shape);
  HermitianMatrix gam_pt = partial_transpose(gam_emb, theta.shape, ab);
  Mat prod = gam_pt.mat() * theta.choi.mat();
  std::vector<std::string> dc = concat(theta.d_labels, theta.c_labels);
  Mat out_dc = partial_trace_raw(prod, theta.shape, dc);
  SubsystemShape dc_shape = reduced_shape(theta.shape, dc);
  std::vector<std::string> cd = concat(theta.c_labels, theta.d_labels);
  Mat out_cd = permute_raw(out_dc, dc_shape, cd);

  ChoiChannel result;
  result.choi = HermitianMatrix(out_cd, 1e-7);
  SubsystemShape sh;
  for (const auto& l : cd) {
    sh.labels.push_back(l);
    sh.dims.push_back(theta.shape.dim_of(l));
  }
  result.shape = sh;
  result.inputs = theta.c_labels;
  result.trace_tol = std::max(n.trace_tol, 1e-7);
  result.validate();
  return result;
}

SuperchannelChoi identity_superchannel(int d_in, int d_out) {
  Mat wire_in = unnormalized_max_entangled(d_in);    // on (A, C)
  Mat wire_out = unnormalized_max_entangled(d_out);  // on (D, B)
  SubsystemShape built =
      shape_of({d_in, d_in, d_out, d_out}, {"A", "C", "D", "B"});
  Mat g = permute_raw(kron(wire_in, wire_out), built, {"A", "D", "C", "B"});
  SuperchannelChoi s;
  s.choi = HermitianMatrix(g, 1e-10);
  s.shape = shape_of({d_in, d_out, d_in, d_out}, {"A", "D", "C", "B"});
  s.a_labels = {"A"};
  s.d_labels = {"D"};
  s.c_labels = {"C"};
  s.b_labels = {"B"};
  s.check_layout();
  return s;
}

SuperchannelChoi superchannel_1w_locc(
    const std::vector<ChoiChannel>& pre_instrument,
    const std::vector<ChoiChannel>& post) {
  if (pre_instrument.empty() || pre_instrument.size() != post.size())
    throw InvalidSuperchannel("instrument and post-processing sizes differ");
  int d_c = pre_instrument[0].in_dim();
  int d_a = pre_instrument[0].out_dim();
  int d_b = post[0].in_dim();
  int d_d = post[0].out_dim();
  Mat instr_sum = Mat::Zero(d_c, d_c);
  Mat g = Mat::Zero(d_a * d_d * d_c * d_b, d_a * d_d * d_c * d_b);
  SubsystemShape built = shape_of({d_c, d_a, d_b, d_d}, {"C", "A", "B", "D"});
  for (size_t x = 0; x < pre_instrument.size(); ++x) {
    const ChoiChannel& e = pre_instrument[x];
    const ChoiChannel& dx = post[x];
    e.validate();
    dx.validate();
    if (e.in_dim() != d_c || e.out_dim() != d_a || dx.in_dim() != d_b ||
        dx.out_dim() != d_d)
      throw DimensionMismatch("instrument branches have mismatched shapes");
    if (dx.cp_only)
      throw InvalidChannel("post-processing branches must be channels");
    instr_sum +=
        partial_trace(e.choi, e.shape, e.inputs).mat();
    g += permute_raw(kron(e.choi.mat(), dx.choi.mat()), built,
                     {"A", "D", "C", "B"});
  }
  if (max_abs(instr_sum - Mat::Identity(d_c, d_c)) > 1e-8)
    throw InvalidChannel("instrument branches do not sum to a channel");

  SuperchannelChoi s;
  s.choi = HermitianMatrix(g, 1e-8);
  s.shape = shape_of({d_a, d_d, d_c, d_b}, {"A", "D", "C", "B"});
  s.a_labels = {"A"};
  s.d_labels = {"D"};
  s.c_labels = {"C"};
  s.b_labels = {"B"};
  s.check_layout();
  return s;
}

SuperchannelChoi superchannel_pre_post(const ChoiChannel& pre,
                                       const ChoiChannel& post) {
  if (pre.cp_only)
    throw InvalidChannel("pre-processing must be trace preserving");
  return superchannel_1w_locc({pre}, {post});
}

Mat mat_from_json(const nlohmann::json& re, const nlohmann::json* im) {
  size_t n = re.size();
  Mat out = Mat::Zero(n, n);
  for (size_t r = 0; r < n; ++r) {
    if (re[r].size() != n) throw DimensionMismatch("matrix rows are ragged");
    for (size_t c = 0; c < n; ++c)
      out(r, c) = cplx(re[r][c].get<double>(), 0.0);
  }
  if (im != nullptr && !im->is_null()) {
    if (im->size() != n) throw DimensionMismatch("im block size mismatch");
    for (size_t r = 0; r < n; ++r)
      for (size_t c = 0; c < n; ++c)
        out(r, c) += cplx(0.0, (*im)[r][c].get<double>());
  }
  return out;
}

nlohmann::json mat_to_json_re(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c).real());
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json mat_to_json_im(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c).imag());
    rows.push_back(row);
  }
  return rows;
}

namespace {

nlohmann::json choi_block(const HermitianMatrix& m, const SubsystemShape& sh,
                          const std::vector<std::string>& inputs) {
  nlohmann::json j;
  j["dims"] = sh.dims;
  j["labels"] = sh.labels;
  j["inputs"] = inputs;
  j["re"] = mat_to_json_re(m.mat());
  j["im"] = mat_to_json_im(m.mat());
  return j;
}

ChannelDescriptor parse_custom(const nlohmann::json& j) {
  const nlohmann::json& blk = j.at("choi");
  std::vector<int> dims = blk.at("dims").get<std::vector<int>>();
  std::vector<std::string> labels =
      blk.at("labels").get<std::vector<std::string>>();
  std::vector<std::string> inputs =
      blk.at("inputs").get<std::vector<std::string>>();
  if (dims.size() != labels.size())
    throw DimensionMismatch("dims and labels lengths differ");
  SubsystemShape given = shape_of(dims, labels);
  const nlohmann::json* im =
      blk.contains("im") ? &blk.at("im") : nullptr;
  Mat m = mat_from_json(blk.at("re"), im);
  if (m.rows() != given.total_dim())
    throw DimensionMismatch("choi matrix does not match dims");

  std::vector<std::string> outs;
  for (const auto& l : labels)
    if (std::find(inputs.begin(), inputs.end(), l) == inputs.end())
      outs.push_back(l);
  for (const auto& l : inputs) given.index_of(l);

  Mat normalized = permute_raw(m, given, concat(inputs, outs));
  ChannelDescriptor desc;
  desc.kind = "custom";
  if (inputs.size() == 1 && outs.size() == 1) {
    desc.bipartite = false;
    desc.p2p = channel_from_choi(normalized, given.dim_of(inputs[0]),
                                 given.dim_of(outs[0]));
  } else if (inputs.size() == 2 && outs.size() == 2) {
    desc.bipartite = true;
    desc.bip = bipartite_from_choi(
        normalized, given.dim_of(inputs[0]), given.dim_of(inputs[1]),
        given.dim_of(outs[0]), given.dim_of(outs[1]));
  } else {
    throw InvalidChannel("custom choi must be 1-in/1-out or 2-in/2-out");
  }
  return desc;
}

}  // namespace

ChannelDescriptor parse_channel(const nlohmann::json& j) {
  ChannelDescriptor desc;
  desc.kind = j.at("kind").get<std::string>();
  for (const char* key : {"d", "p", "q"})
    if (j.contains(key)) desc.params[key] = j.at(key);

  if (desc.kind == "custom") {
    ChannelDescriptor custom = parse_custom(j);
    custom.params = desc.params;
    return custom;
  }
  int d = j.at("d").get<int>();
  if (desc.kind == "identity") {
    desc.p2p = make_identity(d);
  } else if (desc.kind == "erasure") {
    desc.p2p = make_erasure(d, j.at("p").get<double>());
  } else if (desc.kind == "depolarizing") {
    desc.p2p = make_depolarizing(d, j.at("p").get<double>());
  } else if (desc.kind == "semicausal_erasure") {
    desc.bipartite = true;
    desc.bip = make_semicausal_erasure(d, j.at("p").get<double>());
  } else if (desc.kind == "flagged_erasure") {
    desc.bipartite = true;
    desc.bip =
        make_flagged_erasure(d, j.at("p").get<double>(), j.at("q").get<double>());
  } else {
    throw InvalidChannel("unknown channel kind: " + desc.kind);
  }
  return desc;
}

nlohmann::json channel_to_json(const ChoiChannel& ch) {
  nlohmann::json j;
  j["kind"] = "custom";
  j["choi"] = choi_block(ch.choi, ch.shape, ch.inputs);
  return j;
}

nlohmann::json channel_to_json(const BipartiteChannel& ch) {
  nlohmann::json j;
  j["kind"] = "custom";
  j["choi"] = choi_block(ch.ch.choi, ch.ch.shape, ch.ch.inputs);
  return j;
}

nlohmann::json superchannel_to_json(const SuperchannelChoi& s) {
  nlohmann::json j;
  j["groups"] = {{"a", s.a_labels},
                 {"d", s.d_labels},
                 {"c", s.c_labels},
                 {"b", s.b_labels}};
  j["labels"] = s.shape.labels;
  j["dims"] = s.shape.dims;
  j["re"] = mat_to_json_re(s.choi.mat());
  j["im"] = mat_to_json_im(s.choi.mat());
  return j;
}

SuperchannelChoi superchannel_from_json(const nlohmann::json& j) {
  SuperchannelChoi s;
  const nlohmann::json& g = j.at("groups");
  s.a_labels = g.at("a").get<std::vector<std::string>>();
  s.d_labels = g.at("d").get<std::vector<std::string>>();
  s.c_labels = g.at("c").get<std::vector<std::string>>();
  s.b_labels = g.at("b").get<std::vector<std::string>>();
  s.shape = shape_of(j.at("dims").get<std::vector<int>>(),
                     j.at("labels").get<std::vector<std::string>>());
  const nlohmann::json* im = j.contains("im") ? &j.at("im") : nullptr;
  s.choi = HermitianMatrix(mat_from_json(j.at("re"), im), 1e-8);
  s.check_layout();
  return s;
}

}  // namespace unext::quantum
