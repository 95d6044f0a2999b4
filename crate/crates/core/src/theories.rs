//! Built-in operational theories, their published models, and a discrete-qubit generator.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cope::{CopeMatrix, Measurement};
use crate::error::{CopeError, Result};
use crate::matrix::{Matrix, RatMatrix, ScalarMatrix};
use crate::model::{ModelFactorization, ModelKind};
use crate::scalar::{parse_rational, Backend, DEFAULT_EPS};

/// Seed of the fixed pseudo-random sequence behind [`generic_directions`].
pub const GENERIC_DIRECTIONS_SEED: u64 = 0x005E_ED0B_10C4;

fn q(rows: &[&[&str]]) -> RatMatrix {
    Matrix::from_rows(
        rows.iter().map(|r| r.iter().map(|s| parse_rational(s).expect("literal")).collect()).collect(),
    )
}

fn f(rows: &[&[f64]]) -> Matrix<f64> {
    Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
}

fn labelled(data: RatMatrix, measurements: &[(&str, usize)]) -> CopeMatrix {
    let meas = measurements.iter().map(|&(name, n)| Measurement::new(name, n)).collect();
    let preps = (1..=data.cols()).map(|k| format!("P{k}")).collect();
    CopeMatrix::try_new(ScalarMatrix::from_rational(&data), meas, preps, Backend::Exact).expect("built-in theory is valid")
}

/// Six preparations and three two-outcome measurements of the knowledge-balanced toy theory.
pub fn spekkens() -> CopeMatrix {
    labelled(
        q(&[
            &["1", "0", "1/2", "1/2", "1/2", "1/2"],
            &["0", "1", "1/2", "1/2", "1/2", "1/2"],
            &["1/2", "1/2", "1", "0", "1/2", "1/2"],
            &["1/2", "1/2", "0", "1", "1/2", "1/2"],
            &["1/2", "1/2", "1/2", "1/2", "1", "0"],
            &["1/2", "1/2", "1/2", "1/2", "0", "1"],
        ]),
        &[("M1", 2), ("M2", 2), ("M3", 2)],
    )
}

/// Four preparations and two dichotomic measurements with deterministic outcomes.
pub fn boxworld() -> CopeMatrix {
    labelled(
        q(&[&["1", "0", "0", "1"], &["0", "1", "1", "0"], &["1", "0", "1", "0"], &["0", "1", "0", "1"]]),
        &[("M1", 2), ("M2", 2)],
    )
}

/// Boxworld extended by a repeated outcome and a repeated preparation; two three-outcome measurements.
pub fn extended_boxworld() -> CopeMatrix {
    labelled(
        q(&[
            &["0", "0", "0", "0", "1", "1"],
            &["1", "0", "0", "1", "0", "0"],
            &["0", "1", "1", "0", "0", "0"],
            &["0", "0", "0", "0", "1", "1"],
            &["1", "0", "1", "0", "0", "0"],
            &["0", "1", "0", "1", "0", "0"],
        ]),
        &[("M1", 3), ("M2", 3)],
    )
}

pub fn by_name(name: &str) -> Result<CopeMatrix> {
    match normalize(name).as_str() {
        "spekkens" => Ok(spekkens()),
        "boxworld" => Ok(boxworld()),
        "extended_boxworld" => Ok(extended_boxworld()),
        _ => Err(CopeError::UnknownTheory(name.to_string())),
    }
}

fn normalize(name: &str) -> String {
    name.trim().to_ascii_lowercase().replace('-', "_")
}

/// A published model together with a short label naming its role.
#[derive(Clone, Debug)]
pub struct ReferenceModel {
    pub label: &'static str,
    pub model: ModelFactorization,
}

fn exact_model(label: &'static str, c: &CopeMatrix, e: RatMatrix, s: RatMatrix, kind: ModelKind) -> ReferenceModel {
    let model = ModelFactorization::new(
        ScalarMatrix::from_rational(&e),
        ScalarMatrix::from_rational(&s),
        c.block_sizes(),
        kind,
        Backend::Exact,
    )
    .expect("reference shapes agree");
    ReferenceModel { label, model }
}

fn float_model(label: &'static str, c: &CopeMatrix, e: Matrix<f64>, s: Matrix<f64>, kind: ModelKind) -> ReferenceModel {
    let model = ModelFactorization::new(
        ScalarMatrix::from_f64(&e),
        ScalarMatrix::from_f64(&s),
        c.block_sizes(),
        kind,
        Backend::float(),
    )
    .expect("reference shapes agree");
    ReferenceModel { label, model }
}

/// The explicit models published for `spekkens`, `boxworld` and `extended_boxworld`.
///
/// Each carries the most specific kind it was presented as; models with square-root entries
/// use the float backend.
pub fn reference_models(theory: &str) -> Result<Vec<ReferenceModel>> {
    match normalize(theory).as_str() {
        "spekkens" => Ok(spekkens_models()),
        "boxworld" => Ok(boxworld_models()),
        "extended_boxworld" => Ok(extended_boxworld_models()),
        _ => Err(CopeError::UnknownTheory(theory.to_string())),
    }
}

fn spekkens_models() -> Vec<ReferenceModel> {
    let c = spekkens();
    let a = 1.0 / 6f64.sqrt();
    let h = 1.0 / 2f64.sqrt();
    let s = 1.5f64.sqrt();
    let pregpt_u = f(&[
        &[a, 0.0, 0.0, -h, 1.0, -1.0],
        &[a, 0.0, 0.0, h, -1.0, 1.0],
        &[a, 0.0, -h, 0.0, 1.0, -1.0],
        &[a, 0.0, h, 0.0, -1.0, 1.0],
        &[a, -h, 0.0, 0.0, 1.0, -1.0],
        &[a, h, 0.0, 0.0, -1.0, 1.0],
    ]);
    let states = [
        [s, s, s, s, s, s],
        [0.0, 0.0, 0.0, 0.0, -h, h],
        [0.0, 0.0, -h, h, 0.0, 0.0],
        [-h, h, 0.0, 0.0, 0.0, 0.0],
        [0.0; 6],
        [0.0; 6],
    ];
    let pregpt_b = Matrix::from_rows(states.iter().map(|r| r.to_vec()).collect());
    let keep: Vec<usize> = (0..4).collect();
    let gpt_m = pregpt_u.select_cols(&keep);
    let gpt_s = pregpt_b.select_rows(&keep);
    vec![
        float_model("preGPT from the SVD", &c, pregpt_u, pregpt_b, ModelKind::PreGpt),
        float_model("GPT", &c, gpt_m, gpt_s, ModelKind::Gpt),
        exact_model(
            "quasiprobabilistic model",
            &c,
            q(&[
                &["1", "1/2", "1/2", "1/2"],
                &["0", "1/2", "1/2", "1/2"],
                &["1/2", "1", "1/2", "1/2"],
                &["1/2", "0", "1/2", "1/2"],
                &["1/2", "1/2", "1", "0"],
                &["1/2", "1/2", "0", "1"],
            ]),
            q(&[
                &["1", "-1", "0", "0", "0", "0"],
                &["0", "0", "1", "-1", "0", "0"],
                &["0", "1", "0", "1", "1", "0"],
                &["0", "1", "0", "1", "0", "1"],
            ]),
            ModelKind::Quasiprobabilistic,
        ),
        exact_model("trivial ontological model", &c, c.to_rational().expect("exact"), Matrix::identity(6), ModelKind::Ontological),
        exact_model(
            "noncontextual ontological model",
            &c,
            q(&[
                &["1", "0", "0", "1"],
                &["0", "1", "1", "0"],
                &["0", "0", "1", "1"],
                &["1", "1", "0", "0"],
                &["1", "0", "1", "0"],
                &["0", "1", "0", "1"],
            ]),
            q(&[
                &["1/2", "0", "0", "1/2", "1/2", "0"],
                &["0", "1/2", "0", "1/2", "0", "1/2"],
                &["0", "1/2", "1/2", "0", "1/2", "0"],
                &["1/2", "0", "1/2", "0", "0", "1/2"],
            ]),
            ModelKind::NoncontextualOntological,
        ),
    ]
}

/// Transform taking the boxworld GPT to its published quasiprobabilistic model.
pub fn boxworld_quasi_transform() -> RatMatrix {
    q(&[&["1", "1", "1"], &["0", "1", "0"], &["0", "0", "1"]])
}

fn boxworld_models() -> Vec<ReferenceModel> {
    let c = boxworld();
    let u = q(&[
        &["1/2", "1/2", "-1/2", "-1/2"],
        &["1/2", "-1/2", "1/2", "1/2"],
        &["1/2", "-1/2", "-1/2", "-1/2"],
        &["1/2", "1/2", "1/2", "1/2"],
    ]);
    let b = q(&[&["1", "1", "1", "1"], &["0", "0", "-1", "1"], &["-1", "1", "0", "0"], &["0", "0", "0", "0"]]);
    let keep: Vec<usize> = (0..3).collect();
    let m = u.select_cols(&keep);
    let s = b.select_rows(&keep);
    vec![
        exact_model("preGPT from the SVD", &c, u, b, ModelKind::PreGpt),
        exact_model("GPT", &c, m, s, ModelKind::Gpt),
        exact_model(
            "quasiprobabilistic model",
            &c,
            q(&[&["1/2", "1", "0"], &["1/2", "0", "1"], &["1/2", "0", "0"], &["1/2", "1", "1"]]),
            q(&[&["2", "0", "2", "0"], &["0", "0", "-1", "1"], &["-1", "1", "0", "0"]]),
            ModelKind::Quasiprobabilistic,
        ),
        exact_model("trivial ontological model", &c, c.to_rational().expect("exact"), Matrix::identity(4), ModelKind::Ontological),
    ]
}

fn extended_boxworld_models() -> Vec<ReferenceModel> {
    let c = extended_boxworld();
    let h = 1.0 / 2f64.sqrt();
    let r2 = 2f64.sqrt();
    let u = f(&[
        &[h, 0.0, 0.0, 0.0, 0.0, h],
        &[0.0, 0.5, 0.5, -0.5, 0.5, 0.0],
        &[0.0, 0.5, -0.5, 0.5, 0.5, 0.0],
        &[h, 0.0, 0.0, 0.0, 0.0, h],
        &[0.0, 0.5, -0.5, -0.5, 0.5, 0.0],
        &[0.0, 0.5, 0.5, 0.5, 0.5, 0.0],
    ]);
    let b = f(&[
        &[0.0, 0.0, 0.0, 0.0, r2, r2],
        &[1.0, 1.0, 1.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
        &[-1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0; 6],
        &[0.0; 6],
    ]);
    let u2 = f(&[
        &[h, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.5, 0.5, -0.5, 0.0, 0.0],
        &[0.0, 0.5, -0.5, 0.5, 0.0, 1.0],
        &[h, 0.0, 0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.5, -0.5, -0.5, 0.0, 0.0],
        &[0.0, 0.5, 0.5, 0.5, 0.0, 0.0],
    ]);
    let b2 = f(&[
        &[0.0, 0.0, 0.0, 0.0, r2, r2],
        &[1.0, 1.0, 1.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
        &[-1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        &[0.0; 6],
    ]);
    let keep: Vec<usize> = (0..4).collect();
    let m = u.select_cols(&keep);
    let s = b.select_rows(&keep);
    let quotient = extended_boxworld_quotient();
    let mut h_ebw = Matrix::<crate::scalar::Rational>::identity(6).select_rows(&[0, 1, 2, 3, 4]);
    h_ebw[(4, 5)] = parse_rational("1").expect("literal");
    let enlarged_w = q(&[
        &["0", "0", "0", "0", "1", "1", "0"],
        &["1", "0", "0", "1", "0", "0", "0"],
        &["0", "1", "1", "0", "0", "0", "1"],
        &["0", "0", "0", "0", "1", "1", "1"],
        &["1", "0", "1", "0", "0", "0", "0"],
        &["0", "1", "0", "1", "0", "0", "0"],
    ]);
    let mut enlarged_h = Matrix::<crate::scalar::Rational>::zeros(7, 6);
    for i in 0..6 {
        enlarged_h[(i, i)] = parse_rational("1").expect("literal");
    }
    vec![
        float_model("preGPT from the SVD", &c, u, b, ModelKind::PreGpt),
        float_model("preGPT separating repeated procedures", &c, u2, b2, ModelKind::PreGpt),
        float_model("GPT", &c, m, s, ModelKind::Gpt),
        exact_model(
            "quasiprobabilistic model",
            &c,
            q(&[
                &["0", "0", "0", "1"],
                &["1", "0", "0", "0"],
                &["0", "1", "1", "0"],
                &["0", "0", "0", "1"],
                &["1", "0", "1", "0"],
                &["0", "1", "0", "0"],
            ]),
            q(&[
                &["1", "0", "0", "1", "0", "0"],
                &["0", "1", "0", "1", "0", "0"],
                &["0", "0", "1", "-1", "0", "0"],
                &["0", "0", "0", "0", "1", "1"],
            ]),
            ModelKind::Quasiprobabilistic,
        ),
        exact_model(
            "contextual ontological model on the quotient's ontic states",
            &c,
            quotient,
            h_ebw,
            ModelKind::Ontological,
        ),
        exact_model("trivial ontological model", &c, c.to_rational().expect("exact"), Matrix::identity(6), ModelKind::Ontological),
        exact_model("enlarged ontological model", &c, enlarged_w, enlarged_h, ModelKind::Ontological),
    ]
}

/// Extended boxworld with the repeated preparation removed.
pub fn extended_boxworld_quotient() -> RatMatrix {
    q(&[
        &["0", "0", "0", "0", "1"],
        &["1", "0", "0", "1", "0"],
        &["0", "1", "1", "0", "0"],
        &["0", "0", "0", "0", "1"],
        &["1", "0", "1", "0", "0"],
        &["0", "1", "0", "1", "0"],
    ])
}

/// Unit vector on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochDirection {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochDirection {
    /// Rejects vectors whose norm differs from one by more than the default tolerance.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if (n - 1.0).abs() > DEFAULT_EPS.sqrt() {
            return Err(CopeError::Precondition(format!("Bloch direction ({x}, {y}, {z}) has norm {n}")));
        }
        Ok(BlochDirection { x: x / n, y: y / n, z: z / n })
    }

    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(CopeError::Precondition("zero Bloch vector".into()));
        }
        Ok(BlochDirection { x: x / n, y: y / n, z: z / n })
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        BlochDirection { x: theta.sin() * phi.cos(), y: theta.sin() * phi.sin(), z: theta.cos() }
    }

    pub const X: BlochDirection = BlochDirection { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: BlochDirection = BlochDirection { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: BlochDirection = BlochDirection { x: 0.0, y: 0.0, z: 1.0 };

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, o: &BlochDirection) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn antipode(&self) -> Self {
        BlochDirection { x: -self.x, y: -self.y, z: -self.z }
    }
}

/// The three axes in the order `z, x, y`; with antipodes this reproduces [`spekkens`].
pub fn cardinal_directions() -> Vec<BlochDirection> {
    vec![BlochDirection::Z, BlochDirection::X, BlochDirection::Y]
}

/// `count` directions drawn uniformly from the sphere by a fixed-seed generator.
pub fn generic_directions(count: usize) -> Vec<BlochDirection> {
    let mut rng = ChaCha8Rng::seed_from_u64(GENERIC_DIRECTIONS_SEED);
    (0..count)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..2.0 * PI);
            let rho = (1.0 - z * z).sqrt();
            BlochDirection { x: rho * phi.cos(), y: rho * phi.sin(), z }
        })
        .collect()
}

/// Qubit preparations along the given directions (each followed by its antipode when
/// requested) and one two-outcome measurement per direction.
///
/// Outcome `+` along `u` has probability `(1 + u.w) / 2` for preparation direction `w`.
pub fn discrete_qubit(directions: &[BlochDirection], include_antipodes: bool) -> Result<CopeMatrix> {
    if directions.is_empty() {
        return Err(CopeError::Precondition("need at least one direction".into()));
    }
    for (i, a) in directions.iter().enumerate() {
        for (j, b) in directions.iter().enumerate().skip(i + 1) {
            if a.dot(b).abs() >= 1.0 - DEFAULT_EPS {
                return Err(CopeError::Precondition(format!("directions {i} and {j} are parallel")));
            }
        }
    }
    let preps: Vec<BlochDirection> = directions
        .iter()
        .flat_map(|d| if include_antipodes { vec![*d, d.antipode()] } else { vec![*d] })
        .collect();
    let prob = |u: &BlochDirection, w: &BlochDirection| -> f64 {
        let p = (1.0 + u.dot(w)) / 2.0;
        if p.abs() < 1e-15 {
            0.0
        } else if (p - 1.0).abs() < 1e-15 {
            1.0
        } else {
            p.clamp(0.0, 1.0)
        }
    };
    let rows: Vec<Vec<f64>> = directions
        .iter()
        .flat_map(|d| {
            let plus: Vec<f64> = preps.iter().map(|w| prob(d, w)).collect();
            let minus: Vec<f64> = plus.iter().map(|p| 1.0 - p).collect();
            [plus, minus]
        })
        .collect();
    let data = ScalarMatrix::from_f64(&Matrix::from_rows(rows));
    let measurements = (1..=directions.len())
        .map(|j| Measurement { name: format!("D{j}"), outcomes: vec!["+".into(), "-".into()] })
        .collect();
    let labels = directions
        .iter()
        .enumerate()
        .flat_map(|(j, _)| {
            let mut v = vec![format!("+D{}", j + 1)];
            if include_antipodes {
                v.push(format!("-D{}", j + 1));
            }
            v
        })
        .collect();
    CopeMatrix::try_new(data, measurements, labels, Backend::Float { eps: DEFAULT_EPS })
}
