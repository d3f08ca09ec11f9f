#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "unext/linalg.hpp"

namespace unext::quantum {

using linalg::cplx;
using linalg::HermitianMatrix;
using linalg::Mat;
using linalg::SubsystemShape;

inline constexpr double kDefaultTraceTol = 1e-8;

struct InvalidChannel : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidSuperchannel : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidProbability : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unnormalized maximally entangled operator sum_ij |ii><jj| on C^d (x) C^d.
Mat unnormalized_max_entangled(int d);

// Channel stored as its unnormalized Choi operator with subsystems ordered
// inputs first; `inputs` lists the input labels in order and the remaining
// labels of `shape` are the outputs. `cp_only` marks a completely positive,
// trace-nonincreasing branch of an instrument.
struct ChoiChannel {
  HermitianMatrix choi;
  SubsystemShape shape;
  std::vector<std::string> inputs;
  double trace_tol = kDefaultTraceTol;
  bool cp_only = false;

  std::vector<std::string> output_labels() const;
  SubsystemShape input_shape() const;
  SubsystemShape output_shape() const;
  int in_dim() const;
  int out_dim() const;

  double psd_residual() const;  // max(0, -lambda_min(choi))
  double tp_residual() const;   // max-abs entry of Tr_out[choi] - I_in
  // Checks layout, positivity, and trace preservation (trace nonincrease for
  // cp_only); throws InvalidChannel.
  void validate() const;
};

// Wraps an explicit Choi matrix with input label "A" and output label "B".
ChoiChannel channel_from_choi(const Mat& choi, int d_in, int d_out,
                              double trace_tol = kDefaultTraceTol);

// Choi = sum_x (id (x) K_x) Gamma (id (x) K_x)^dag; cp_only is set when
// sum_x K_x^dag K_x differs from the identity.
ChoiChannel choi_from_kraus(const std::vector<Mat>& kraus, int d_in, int d_out,
                            double trace_tol = kDefaultTraceTol);

// Named point-to-point channels.
ChoiChannel make_identity(int d);
// Output dimension d+1 with the erasure flag |e> at basis index d:
// rho -> (1-p) rho + p Tr[rho] |e><e|.
ChoiChannel make_erasure(int d, double p);
// rho -> (1-p) rho + p pi, completely positive for p in [0, d^2/(d^2-1)].
ChoiChannel make_depolarizing(int d, double p);
// rho -> Tr[rho] sigma.
ChoiChannel make_replacer(int d_in, const HermitianMatrix& sigma);

// Tensor product with subsystems reordered to (in1, in2, out1, out2); the
// factor labels get suffixes "1" and "2".
ChoiChannel tensor_channel(const ChoiChannel& n1, const ChoiChannel& n2);

struct LabeledOperator {
  HermitianMatrix op;
  SubsystemShape shape;
};

// Applies the channel to the subsystems of `state` named by `on`, matched to
// the channel inputs in order. The result keeps the untouched labels in their
// original order and appends the channel output labels.
LabeledOperator apply_channel_labeled(const ChoiChannel& ch,
                                      const HermitianMatrix& state,
                                      const SubsystemShape& shape,
                                      const std::vector<std::string>& on);
HermitianMatrix apply_channel(const ChoiChannel& ch,
                              const HermitianMatrix& state,
                              const SubsystemShape& shape,
                              const std::vector<std::string>& on);

// Bipartite channel N_{AB -> A'B'} with the fixed subsystem order
// (A, B, Ap, Bp); A/Ap sit on the sender side, B/Bp on the receiver side.
struct BipartiteChannel {
  ChoiChannel ch;
  bool semicausal_checked = false;

  int dA() const;
  int dB() const;
  int dAp() const;
  int dBp() const;
  // Residual of the no-signaling condition from the B side to the A side:
  // Tr_{Bp}[choi] = (1/dB) Tr_{B Bp}[choi] (x) I_B.
  double semicausal_residual() const;
};

BipartiteChannel bipartite_from_choi(const Mat& choi, int dA, int dB, int dAp,
                                     int dBp,
                                     double trace_tol = kDefaultTraceTol);
// Returns the channel with semicausal_checked set; throws InvalidChannel when
// the no-signaling residual exceeds tol.
BipartiteChannel check_semicausal(BipartiteChannel ch, double tol = 1e-8);

// rho -> p rho_{Ap} (x) |e><e|_{Bp} + (1-p) rho_{Bp} (x) |e><e|_{Ap} with both
// outputs d+1 dimensional and a trivial B input.
BipartiteChannel make_semicausal_erasure(int d, double p);
// Erasure with a depolarized success flag on the sender side:
// rho -> (1-p) rho_{Bp} (x) Dq(|1><1|_{Ap}) + p Tr[rho] |e><e|_{Bp} (x)
// Dq(|0><0|_{Ap}), where Dq mixes the flag toward pi with weight q.
BipartiteChannel make_flagged_erasure(int d, double p, double q);

// Superchannel mapping channels (a -> b) to channels (c -> d), stored as the
// Choi operator of its bipartite realization on (C,B) -> (A,D) with the fixed
// subsystem order (A, D, C, B). Group label vectors allow replicated roles.
struct SuperchannelChoi {
  HermitianMatrix choi;
  SubsystemShape shape;  // concatenation a_labels|d_labels|c_labels|b_labels
  std::vector<std::string> a_labels;
  std::vector<std::string> d_labels;
  std::vector<std::string> c_labels;
  std::vector<std::string> b_labels;

  int dim_a() const;
  int dim_d() const;
  int dim_c() const;
  int dim_b() const;
  void check_layout() const;  // shape order must match the four groups
};

struct SuperchannelReport {
  double psd_residual = 0;
  double tp_residual = 0;            // Tr_{AD}[choi] = I_{CB}
  double nonsignaling_residual = 0;  // Tr_D[choi] = (1/dB) Tr_{BD}[choi] (x) I_B
  double worst() const;
  bool ok(double tol = 1e-7) const;
};

SuperchannelReport validate_superchannel(const SuperchannelChoi& s);

// Choi of theta[n] on (c_labels, d_labels), via contraction of the embedded
// argument Choi against the superchannel Choi.
ChoiChannel superchannel_apply(const SuperchannelChoi& theta,
                               const ChoiChannel& n);

SuperchannelChoi identity_superchannel(int d_in, int d_out);
// theta[n] = sum_x post_x o n o pre_x with {pre_x} a quantum instrument (CP
// branches summing to a channel) and every post_x a channel.
SuperchannelChoi superchannel_1w_locc(
    const std::vector<ChoiChannel>& pre_instrument,
    const std::vector<ChoiChannel>& post);
SuperchannelChoi superchannel_pre_post(const ChoiChannel& pre,
                                       const ChoiChannel& post);

// JSON descriptors. Channels:
//   {"kind": "identity"|"erasure"|"depolarizing"|"semicausal_erasure"|
//    "flagged_erasure"|"custom", "d": int, "p": float?, "q": float?,
//    "choi": {"dims": [int], "labels": [str], "inputs": [str],
//             "re": [[float]], "im": [[float]]}?}
// The custom kind requires the choi block; a 1-in/1-out block parses as a
// point-to-point channel, a 2-in/2-out block as a bipartite channel whose
// first input/output labels sit on the sender side.
struct ChannelDescriptor {
  std::string kind;
  bool bipartite = false;
  ChoiChannel p2p;        // meaningful when !bipartite
  BipartiteChannel bip;   // meaningful when bipartite
  nlohmann::json params;  // scalar parameters echoed into reports
};

ChannelDescriptor parse_channel(const nlohmann::json& j);
nlohmann::json channel_to_json(const ChoiChannel& ch);
nlohmann::json channel_to_json(const BipartiteChannel& ch);

Mat mat_from_json(const nlohmann::json& re, const nlohmann::json* im);
nlohmann::json mat_to_json_re(const Mat& m);
nlohmann::json mat_to_json_im(const Mat& m);

// Superchannels: {"groups": {"a": [str], "d": [str], "c": [str], "b": [str]},
//  "labels": [str], "dims": [int], "re": [[float]], "im": [[float]]}.
nlohmann::json superchannel_to_json(const SuperchannelChoi& s);
SuperchannelChoi superchannel_from_json(const nlohmann::json& j);

}  // namespace unext::quantum
