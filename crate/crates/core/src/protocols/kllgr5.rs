use std::sync::Arc;

use num_complex::Complex64;

use crate::fabric::{no_user_ops, slots, FabricError, InputSet, Op, Owner, ProtocolSpec, Register, RoundSpec, Slot};
use crate::qcore::{kernel, Matrix, QError, MAX_AMPLITUDES};

/// A classical s-server PIR scheme in the generic (q_t, ans_t) form.
///
/// Databases are `len()` entries from an alphabet of size `entry_dim()`;
/// the target index `k` is 1-based.
pub trait ClassicalPirScheme: Send + Sync {
    fn name(&self) -> String;
    fn servers(&self) -> usize;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn entry_dim(&self) -> usize;
    /// Size of the user's randomness range.
    fn randomness(&self) -> usize;
    fn query_dim(&self) -> usize;
    fn answer_dim(&self) -> usize;
    fn query(&self, t: usize, g: usize, k: usize) -> usize;
    fn answer(&self, t: usize, q: usize, db: &[usize]) -> usize;
    /// Classical reconstruction of a_k from all queries and answers.
    fn reconstruct(&self, queries: &[usize], answers: &[usize]) -> usize;
    /// Reversible form of the reconstruction: a bijection on the answer
    /// tuple for fixed queries, after which answer `output_index()` holds a_k.
    fn reconstruction_map(&self, queries: &[usize], answers: &[usize]) -> Vec<usize>;
    fn output_index(&self) -> usize;
}

/// Two-server XOR scheme over w-bit entries: q_1 = G, q_2 = G ⊕ e_k with G a
/// uniform subset of [n]; each server returns the XOR of the selected
/// entries and a_k = ans_1 ⊕ ans_2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XorScheme {
    n: usize,
    w: usize,
}

impl XorScheme {
    pub fn new(n: usize, w: usize) -> Result<Self, FabricError> {
        if n == 0 || n > 16 || w == 0 || w > 8 {
            return Err(FabricError::Definition(format!(
                "XOR scheme needs 1 ≤ n ≤ 16 and 1 ≤ w ≤ 8, got n={n}, w={w}"
            )));
        }
        Ok(Self { n, w })
    }

    pub fn bits(&self) -> usize {
        self.w
    }
}

impl ClassicalPirScheme for XorScheme {
    fn name(&self) -> String {
        format!("xor2(n={},w={})", self.n, self.w)
    }

    fn servers(&self) -> usize {
        2
    }

    fn len(&self) -> usize {
        self.n
    }

    fn entry_dim(&self) -> usize {
        1 << self.w
    }

    fn randomness(&self) -> usize {
        1 << self.n
    }

    fn query_dim(&self) -> usize {
        1 << self.n
    }

    fn answer_dim(&self) -> usize {
        1 << self.w
    }

    fn query(&self, t: usize, g: usize, k: usize) -> usize {
        if t == 1 {
            g
        } else {
            g ^ (1 << (k - 1))
        }
    }

    fn answer(&self, _t: usize, q: usize, db: &[usize]) -> usize {
        db.iter()
            .enumerate()
            .filter(|(i, _)| q >> i & 1 == 1)
            .fold(0, |acc, (_, &x)| acc ^ x)
    }

    fn reconstruct(&self, _queries: &[usize], answers: &[usize]) -> usize {
        answers[0] ^ answers[1]
    }

    fn reconstruction_map(&self, _queries: &[usize], answers: &[usize]) -> Vec<usize> {
        vec![answers[0], answers[0] ^ answers[1]]
    }

    fn output_index(&self) -> usize {
        1
    }
}

/// Householder reflection taking |0⟩ to the real nonnegative unit vector `psi`.
fn prepare_from_zero(psi: &[f64]) -> Matrix {
    let n = psi.len();
    let mut v: Vec<f64> = psi.iter().map(|x| -x).collect();
    v[0] += 1.0;
    let nn: f64 = v.iter().map(|x| x * x).sum();
    let mut m = Matrix::identity(n, n);
    if nn > 1e-24 {
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] -= Complex64::new(2.0 * v[i] * v[j] / nn, 0.0);
            }
        }
    }
    m
}

/// One-server simulation of an s-server classical scheme.
///
/// Registers: Q (all s queries), Q_1..Q_s, Ans_1..Ans_s on the user side and
/// the database D_1..D_n on the server. The user prepares
/// (1/√g) Σ_g |q_1..q_s⟩_Q |q_1⟩..|q_s⟩; round t ships (Q_t, Ans_t) to the
/// server, which adds ans_t(q_t) into Ans_t and returns both. The
/// reconstruction applies the reversible decoder to the answers and
/// measures the designated answer register.
pub fn build_kllgr5(scheme: &(impl ClassicalPirScheme + Clone + 'static)) -> Result<ProtocolSpec, FabricError> {
    let s = scheme.servers();
    let n = scheme.len();
    let qd = scheme.query_dim();
    let ad = scheme.answer_dim();
    let ed = scheme.entry_dim();
    if s == 0 || n == 0 {
        return Err(FabricError::Definition(
            "scheme needs at least one server and one entry".into(),
        ));
    }
    let mut dims = vec![qd.checked_pow(s as u32).ok_or(QError::ResourceGuard {
        requested: (qd as f64).powi(s as i32),
        limit: MAX_AMPLITUDES,
    })?];
    dims.extend(std::iter::repeat_n(qd, s));
    dims.extend(std::iter::repeat_n(ad, s));
    dims.extend(std::iter::repeat_n(ed, n));
    kernel::checked_size(&dims)?;

    let qn: Vec<String> = (1..=s).map(|t| format!("Q{t}")).collect();
    let an: Vec<String> = (1..=s).map(|t| format!("Ans{t}")).collect();
    let dn: Vec<String> = (1..=n).map(|l| format!("D{l}")).collect();

    let mut registers = vec![Register::new("Q", qd.pow(s as u32), Owner::User)];
    registers.extend(qn.iter().map(|x| Register::new(x.clone(), qd, Owner::User)));
    registers.extend(an.iter().map(|x| Register::new(x.clone(), ad, Owner::User)));
    registers.extend(dn.iter().map(|x| Register::new(x.clone(), ed, Owner::Server)));

    let sch = scheme.clone();
    let qn_u = qn.clone();
    let prep = Arc::new(move |k: usize| {
        let qdim = qd.pow(s as u32);
        let mut amps = vec![0.0f64; qdim];
        for g in 0..sch.randomness() {
            let idx = (1..=s).fold(0, |acc, t| acc * qd + sch.query(t, g, k));
            amps[idx] += 1.0;
        }
        let norm = amps.iter().map(|x| x * x).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|x| *x /= norm);
        let mut copy_targets: Vec<Slot> = slots(["Q"]);
        copy_targets.extend(slots(&qn_u));
        vec![
            Op::unitary(slots(["Q"]), prepare_from_zero(&amps)),
            Op::permute(copy_targets, move |v| {
                let mut out = v.to_vec();
                let q = kernel::digits_of(v[0], &vec![qd; s]);
                for t in 0..s {
                    out[1 + t] = (v[1 + t] + q[t]) % qd;
                }
                out
            }),
        ]
    });

    let mut rounds = Vec::with_capacity(s);
    for t in 1..=s {
        let mut targets = slots([&qn[t - 1], &an[t - 1]]);
        targets.extend(slots(&dn));
        let sch = scheme.clone();
        let server = Op::permute(targets, move |v| {
            let mut out = v.to_vec();
            out[1] = (v[1] + sch.answer(t, v[0], &v[2..])) % ad;
            out
        });
        rounds.push(RoundSpec {
            user: if t == 1 { prep.clone() } else { no_user_ops() },
            query: vec![qn[t - 1].clone(), an[t - 1].clone()],
            server: vec![server],
            answer: vec![qn[t - 1].clone(), an[t - 1].clone()],
        });
    }

    let sch = scheme.clone();
    let an_r = an.clone();
    let out_name = an[scheme.output_index()].clone();
    let out_r = out_name.clone();
    let reconstruction = Arc::new(move |_k: usize| {
        let sch = sch.clone();
        let mut targets = slots(["Q"]);
        targets.extend(slots(&an_r));
        vec![
            Op::permute(targets, move |v| {
                let q = kernel::digits_of(v[0], &vec![qd; s]);
                let mut out = vec![v[0]];
                out.extend(sch.reconstruction_map(&q, &v[1..]));
                out
            }),
            Op::measure(slots([&out_r]), "out"),
        ]
    });

    let spec = ProtocolSpec {
        name: "kllgr5".into(),
        message_dims: vec![ed; n],
        input_set: InputSet::ClassicalBasis,
        unitary_type: true,
        registers,
        message_registers: dn,
        prior_entanglement: Vec::new(),
        server_setup: Vec::new(),
        rounds,
        reconstruction,
        output: Arc::new(move |_| vec![out_name.clone()]),
    };
    spec.validate()?;
    Ok(spec)
}
