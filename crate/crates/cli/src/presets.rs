//! Built-in scenarios.

use std::f64::consts::PI;

use rmt_clt::{specular, CMatrix, EntryDistribution, EntryKind, ModelSpec, SolverOptions};

use crate::config::{McSettings, OutputKind, Scenario};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> Scenario,
}

impl Preset {
    pub fn scenario(&self) -> Scenario {
        (self.build)()
    }
}

const SIZE: usize = 64;

fn dist(kind: EntryKind) -> EntryDistribution {
    EntryDistribution::new(kind).expect("preset laws are valid")
}

fn scenario(name: &str, spec: ModelSpec, rho_grid: Vec<f64>, replicates: Option<usize>) -> Scenario {
    let mc = replicates.map(|r| McSettings {
        replicates: r,
        master_seed: 20_240_101,
        workers: 1,
    });
    let outputs = if mc.is_some() {
        OutputKind::ALL.into_iter().collect()
    } else {
        [OutputKind::Equilibrium, OutputKind::Report].into_iter().collect()
    };
    Scenario {
        name: name.to_string(),
        spec,
        rho_grid,
        mc,
        outputs,
        solver: SolverOptions::default(),
    }
}

fn centered(kind: EntryKind) -> ModelSpec {
    ModelSpec::identity_profiles(CMatrix::zeros(SIZE, SIZE), dist(kind)).expect("valid preset")
}

fn rician(kind: EntryKind) -> ModelSpec {
    ModelSpec::identity_profiles(specular::rank_one(SIZE, SIZE, 1.0), dist(kind)).expect("valid preset")
}

fn non_circular(t: f64) -> ModelSpec {
    rician(EntryKind::NonCircularGaussian { t, theta: PI / 6.0 })
}

macro_rules! sweep {
    ($name:literal, $t:literal) => {
        Preset {
            name: $name,
            description: concat!(
                "rank-one A with ||A|| = 1, non-circular Gaussian entries with |E X^2| = ",
                stringify!($t)
            ),
            build: || scenario($name, non_circular($t), vec![1.0], Some(2000)),
        }
    };
}

pub static PRESETS: &[Preset] = &[
    Preset {
        name: "mp-unit",
        description: "N = n = 64, D = I, D~ = I, A = 0, complex circular Gaussian, rho = 1",
        build: || {
            scenario(
                "mp-unit",
                centered(EntryKind::ComplexGaussianCircular),
                vec![1.0],
                Some(2000),
            )
        },
    },
    Preset {
        name: "real-gaussian",
        description: "as mp-unit with real Gaussian entries (pseudo-variance term equals the main term)",
        build: || {
            scenario(
                "real-gaussian",
                centered(EntryKind::RealGaussian),
                vec![1.0],
                Some(2000),
            )
        },
    },
    Preset {
        name: "rademacher-bias",
        description: "as mp-unit with Rademacher entries and 5000 replicates for the bias",
        build: || {
            scenario(
                "rademacher-bias",
                centered(EntryKind::RademacherReal),
                vec![1.0],
                Some(5000),
            )
        },
    },
    Preset {
        name: "qpsk",
        description: "as mp-unit with QPSK entries (negative fourth cumulant, circular)",
        build: || scenario("qpsk", centered(EntryKind::Qpsk), vec![1.0], Some(2000)),
    },
    sweep!("noncircular-sweep-0", 0.0),
    sweep!("noncircular-sweep-0.25", 0.25),
    sweep!("noncircular-sweep-0.5", 0.5),
    sweep!("noncircular-sweep-0.75", 0.75),
    sweep!("noncircular-sweep-1", 1.0),
    Preset {
        name: "rician-noncircular",
        description: "rank-one A with ||A|| = 1, non-circular Gaussian entries (t = 0.5, angle pi/6)",
        build: || scenario("rician-noncircular", non_circular(0.5), vec![1.0], Some(2000)),
    },
    Preset {
        name: "signal-plus-noise",
        description: "D = I, D~ = I, complex rank-one A with ||A|| = 2, deterministic sweep over rho",
        build: || {
            let spec = ModelSpec::identity_profiles(
                specular::rank_one_phased(SIZE, SIZE, 2.0),
                EntryDistribution::complex_gaussian(),
            )
            .expect("valid preset");
            scenario(
                "signal-plus-noise",
                spec,
                vec![0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0],
                None,
            )
        },
    },
    Preset {
        name: "variance-profile",
        description: "N = 96, n = 64, graded row and column variances, rank-one A, QPSK entries",
        build: || {
            let d = (0..96).map(|i| 0.25 + 1.5 * i as f64 / 95.0).collect();
            let dt = (0..SIZE).map(|j| if j % 2 == 0 { 0.5 } else { 1.5 }).collect();
            let spec =
                ModelSpec::new(d, dt, specular::rank_one(96, SIZE, 1.0), dist(EntryKind::Qpsk)).expect("valid preset");
            scenario("variance-profile", spec, vec![1.0], Some(2000))
        },
    },
];

pub fn find(name: &str) -> Option<Scenario> {
    PRESETS.iter().find(|p| p.name == name).map(Preset::scenario)
}
