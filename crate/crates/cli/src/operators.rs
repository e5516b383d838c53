//! Tuple operators reachable through `qmc apply`.

use qmc_core::linalg::{TolerancePolicy, C64};
use qmc_core::registry::{Named, Registry};
use qmc_core::system::{self, SystemTuple};

use crate::document::McInfo;
use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct OpArgs {
    pub lambda: Option<C64>,
    pub mu: Option<C64>,
    pub index: Option<usize>,
    pub newpole: Option<C64>,
}

impl OpArgs {
    fn need<T: Copy>(v: Option<T>, op: &str, flag: &str) -> Result<T, CliError> {
        v.ok_or_else(|| CliError::Usage(format!("apply {op} needs --{flag}")))
    }
}

pub struct Applied {
    pub tuple: SystemTuple,
    pub mc: Option<McInfo>,
    /// The operator acted as the identity; the input document is passed through.
    pub unchanged: bool,
}

impl Applied {
    fn plain(tuple: SystemTuple) -> Self {
        Applied { tuple, mc: None, unchanged: false }
    }
}

pub trait Operator: Named + Send + Sync {
    fn description(&self) -> &str;
    fn apply(&self, t: &SystemTuple, args: &OpArgs, tol: &TolerancePolicy) -> Result<Applied, CliError>;
}

struct Conv;
struct Mc;
struct Add;
struct PoleMove;
struct SyConv;
struct DrConv;

impl Named for Conv {
    fn name(&self) -> &str {
        "conv"
    }
}

impl Operator for Conv {
    fn description(&self) -> &str {
        "q-convolution c^q_λ (--lambda)"
    }

    fn apply(&self, t: &SystemTuple, args: &OpArgs, _tol: &TolerancePolicy) -> Result<Applied, CliError> {
        let lambda = OpArgs::need(args.lambda, "conv", "lambda")?;
        Ok(Applied::plain(system::q_convolution(t, lambda)))
    }
}

impl Named for Mc {
    fn name(&self) -> &str {
        "mc"
    }
}

impl Operator for Mc {
    fn description(&self) -> &str {
        "q-middle convolution mc^q_λ (--lambda); records proj, lift and dim K/L"
    }

    fn apply(&self, t: &SystemTuple, args: &OpArgs, tol: &TolerancePolicy) -> Result<Applied, CliError> {
        let lambda = OpArgs::need(args.lambda, "mc", "lambda")?;
        let mc = system::middle_convolution(t, lambda, tol)?;
        let info = McInfo::new(lambda, &mc);
        Ok(Applied { tuple: mc.reduced, mc: Some(info), unchanged: false })
    }
}

impl Named for Add {
    fn name(&self) -> &str {
        "add"
    }
}

impl Operator for Add {
    fn description(&self) -> &str {
        "addition by x^μ (--mu)"
    }

    fn apply(&self, t: &SystemTuple, args: &OpArgs, _tol: &TolerancePolicy) -> Result<Applied, CliError> {
        let mu = OpArgs::need(args.mu, "add", "mu")?;
        // μ = 0 is the identity; skip the arithmetic so signed zeros survive.
        if mu == C64::new(0.0, 0.0) {
            return Ok(Applied { tuple: t.clone(), mc: None, unchanged: true });
        }
        Ok(Applied::plain(system::add_mu(t, mu)))
    }
}

impl Named for PoleMove {
    fn name(&self) -> &str {
        "polemove"
    }
}

impl Operator for PoleMove {
    fn description(&self) -> &str {
        "Pochhammer-ratio gauge moving pole b_i (--index) to --newpole"
    }

    fn apply(&self, t: &SystemTuple, args: &OpArgs, _tol: &TolerancePolicy) -> Result<Applied, CliError> {
        let i = OpArgs::need(args.index, "polemove", "index")?;
        let b = OpArgs::need(args.newpole, "polemove", "newpole")?;
        Ok(Applied::plain(system::pole_move(t, i, b)?))
    }
}

impl Named for SyConv {
    fn name(&self) -> &str {
        "syconv"
    }
}

impl Operator for SyConv {
    fn description(&self) -> &str {
        "convolution in the Sakai-Yamaguchi normalisation (--lambda)"
    }

    fn apply(&self, t: &SystemTuple, args: &OpArgs, _tol: &TolerancePolicy) -> Result<Applied, CliError> {
        let lambda = OpArgs::need(args.lambda, "syconv", "lambda")?;
        Ok(Applied::plain(system::sy_convolution(t, lambda)))
    }
}

impl Named for DrConv {
    fn name(&self) -> &str {
        "drconv"
    }
}

impl Operator for DrConv {
    fn description(&self) -> &str {
        "Dettweiler-Reiter convolution with parameter --lambda"
    }

    fn apply(&self, t: &SystemTuple, args: &OpArgs, _tol: &TolerancePolicy) -> Result<Applied, CliError> {
        let lambda = OpArgs::need(args.lambda, "drconv", "lambda")?;
        Ok(Applied::plain(system::dr_convolution(t, lambda)))
    }
}

pub fn registry() -> Registry<dyn Operator> {
    let mut r: Registry<dyn Operator> = Registry::new();
    r.register(Box::new(Conv));
    r.register(Box::new(Mc));
    r.register(Box::new(Add));
    r.register(Box::new(PoleMove));
    r.register(Box::new(SyConv));
    r.register(Box::new(DrConv));
    r
}
