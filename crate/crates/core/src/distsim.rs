//! Round-synchronous simulation of the distributed bailout algorithms.
//!
//! Each bank only sees its own liabilities, assets and weight plus what
//! arrives in its inbox. A central node holds the budget price `λ` and
//! collects stopping bits. Three schedules are provided:
//!
//! * [`run_algorithm_a`]: single-loop proximal dual ascent with a budget.
//! * [`run_algorithm_a_prime`]: the same with a fixed cash price `λ`.
//! * [`run_algorithm_p`]: the two-level reference version, which runs the
//!   dual loop to tolerance before moving the proximal anchors.

use serde::{Deserialize, Serialize};

use crate::clearing::{clear_proportional, ClearingMethod};
use crate::error::{Error, Result};
use crate::netmodel::{ClearingResult, FinancialNetwork, InjectionPlan, SolveMeta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistStart {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub q: Vec<f64>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistConfig {
    pub alpha: f64,
    pub beta: f64,
    pub tol1: f64,
    pub tol2: f64,
    pub max_rounds: usize,
    /// Cash price for the Lagrangian schedule.
    pub lambda: Option<f64>,
    /// Record the state every this many rounds (the last round is always kept).
    pub trace_every: usize,
    /// Zero start when `None`.
    pub start: Option<DistStart>,
}

impl Default for DistConfig {
    fn default() -> Self {
        DistConfig {
            alpha: 0.1,
            beta: 0.1,
            tol1: 1e-6,
            tol2: 1e-6,
            max_rounds: 5_000_000,
            lambda: None,
            trace_every: 1000,
            start: None,
        }
    }
}

impl DistConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.alpha) || !pos(self.beta) || !pos(self.tol1) || !pos(self.tol2) {
            return Err(Error::InvalidParams("step sizes and tolerances must be positive".into()));
        }
        if self.max_rounds == 0 || self.trace_every == 0 {
            return Err(Error::InvalidParams("max_rounds and trace_every must be positive".into()));
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(Error::InvalidParams(format!("lambda must be nonnegative, got {l}")));
            }
        }
        if let Some(s) = &self.start {
            if s.y.len() != n || s.z.len() != n || s.q.len() != n {
                return Err(Error::DimensionMismatch("start vectors must have one entry per node".into()));
            }
            if s.q.iter().chain(&s.z).any(|x| *x < 0.0) || s.lambda < 0.0 {
                return Err(Error::InvalidParams("start prices and anchors must be nonnegative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Endpoint {
    Node(usize),
    Central,
}

/// Everything that crosses the wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Message {
    /// `Π_ij p_i`, from borrower `i` to creditor `j`.
    PaymentToCreditor { from: usize, to: usize, amount: f64 },
    CashToCentral { from: usize, cash: f64 },
    StopBit { from: usize, bit: bool },
    /// `q_i`, from creditor `i` to borrower `to`.
    PriceToBorrower { from: usize, to: usize, price: f64 },
    LambdaBroadcast { lambda: f64 },
}

impl Message {
    pub fn recipients(&self, n: usize) -> Vec<Endpoint> {
        match *self {
            Message::PaymentToCreditor { to, .. } | Message::PriceToBorrower { to, .. } => vec![Endpoint::Node(to)],
            Message::CashToCentral { .. } | Message::StopBit { .. } => vec![Endpoint::Central],
            Message::LambdaBroadcast { .. } => (0..n).map(Endpoint::Node).collect(),
        }
    }

    /// Rough wire size: a 16-byte header plus the payload.
    pub fn wire_bytes(&self) -> usize {
        match self {
            Message::StopBit { .. } => 17,
            _ => 24,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Message::PaymentToCreditor { .. } => "payment_to_creditor",
            Message::CashToCentral { .. } => "cash_to_central",
            Message::StopBit { .. } => "stop_bit",
            Message::PriceToBorrower { .. } => "price_to_borrower",
            Message::LambdaBroadcast { .. } => "lambda_broadcast",
        }
    }
}

/// Observes every message handed to the bus.
pub trait Transport {
    fn record(&mut self, round: usize, msg: &Message);
}

/// Counts messages and bytes; keeps the first `log_limit` messages.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CountingTransport {
    pub messages: u64,
    pub bytes: u64,
    pub log_limit: usize,
    pub log: Vec<(usize, Message)>,
}

impl CountingTransport {
    pub fn with_log(log_limit: usize) -> Self {
        CountingTransport { log_limit, ..Default::default() }
    }

    /// Wall time implied by `rounds` rounds with the given per-phase latency.
    /// Each round has three sequential communication phases.
    pub fn latency_estimate(rounds: usize, per_phase_seconds: f64) -> f64 {
        3.0 * rounds as f64 * per_phase_seconds
    }
}

impl Transport for CountingTransport {
    fn record(&mut self, round: usize, msg: &Message) {
        self.messages += 1;
        self.bytes += msg.wire_bytes() as u64;
        if self.log.len() < self.log_limit {
            self.log.push((round, *msg));
        }
    }
}

/// Per-recipient inboxes, refilled every phase.
struct Bus<'t> {
    nodes: Vec<Vec<Message>>,
    central: Vec<Message>,
    transport: &'t mut dyn Transport,
    round: usize,
}

impl Bus<'_> {
    fn send(&mut self, msg: Message) {
        self.transport.record(self.round, &msg);
        for to in msg.recipients(self.nodes.len()) {
            match to {
                Endpoint::Node(i) => self.nodes[i].push(msg),
                Endpoint::Central => self.central.push(msg),
            }
        }
    }

    fn clear(&mut self) {
        self.nodes.iter_mut().for_each(Vec::clear);
        self.central.clear();
    }
}

/// What a bank knows: its own data, its neighbours and the latest prices
/// its creditors have sent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistNodeState {
    pub id: usize,
    e: f64,
    w: f64,
    pbar: f64,
    /// `(j, Π_ij)` for every creditor `j`.
    creditors: Vec<(usize, f64)>,
    borrowers: Vec<usize>,
    creditor_q: Vec<f64>,
    pub p: f64,
    pub c: f64,
    pub q: f64,
    pub y: f64,
    pub z: f64,
    pub y_tilde: f64,
    pub z_tilde: f64,
    pub b: bool,
}

impl DistNodeState {
    fn price_pull(&self) -> f64 {
        self.w - self.q + self.creditors.iter().zip(&self.creditor_q).map(|((_, pi), q)| pi * q).sum::<f64>()
    }

    fn read_prices(&mut self, inbox: &[Message]) {
        for m in inbox {
            if let Message::PriceToBorrower { from, price, .. } = *m {
                if let Some(k) = self.creditors.iter().position(|(j, _)| *j == from) {
                    self.creditor_q[k] = price;
                }
            }
        }
    }

    /// Step 1: maximize the proximal Lagrangian for fixed prices.
    fn primal_step(&mut self, lambda: f64, bus: &mut Bus<'_>) {
        self.p = (self.y + 0.5 * self.price_pull()).clamp(0.0, self.pbar);
        self.c = (self.z + 0.5 * (self.q - lambda)).max(0.0);
        for &(j, pi) in &self.creditors {
            bus.send(Message::PaymentToCreditor { from: self.id, to: j, amount: pi * self.p });
        }
    }

    /// Step 2: price update from the local budget constraint.
    fn price_step(&mut self, beta: f64, inbox: &[Message], bus: &mut Bus<'_>) {
        let inflow: f64 = inbox
            .iter()
            .filter_map(|m| match *m {
                Message::PaymentToCreditor { amount, .. } => Some(amount),
                _ => None,
            })
            .sum();
        self.q = (self.q + beta * (self.p - self.e - self.c - inflow)).max(0.0);
        for &k in &self.borrowers {
            bus.send(Message::PriceToBorrower { from: self.id, to: k, price: self.q });
        }
    }

    /// Step 3: move the anchors and report the stopping bit.
    fn anchor_step(&mut self, lambda: f64, tol1: f64, tol2: f64) -> bool {
        let yt = self.y + 0.5 * self.price_pull();
        let zt = self.z + 0.5 * (self.q - lambda);
        self.b = (yt - self.y_tilde).abs() < tol1 && (zt - self.z_tilde).abs() < tol2;
        self.y_tilde = yt;
        self.z_tilde = zt;
        self.y = yt.clamp(0.0, self.pbar);
        self.z = zt.max(0.0);
        self.b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralState {
    pub lambda: f64,
    pub cash: Vec<f64>,
    pub bits: Vec<bool>,
    pub t: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DistTrace {
    pub rounds: Vec<usize>,
    pub p: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub y_tilde: Vec<Vec<f64>>,
    pub z_tilde: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
    /// For the two-level schedule: inner iterations per outer step.
    pub inner_iterations: Vec<usize>,
    /// For the two-level schedule: residuals of the first inner loop that ran
    /// at least 100 iterations, or of the longest one.
    pub inner_residuals: Vec<f64>,
    pub total_rounds: usize,
    pub messages: u64,
    pub bytes: u64,
}

impl DistTrace {
    fn push(&mut self, t: usize, nodes: &[DistNodeState], lambda: f64) {
        self.rounds.push(t);
        self.p.push(nodes.iter().map(|s| s.p).collect());
        self.c.push(nodes.iter().map(|s| s.c).collect());
        self.q.push(nodes.iter().map(|s| s.q).collect());
        self.y_tilde.push(nodes.iter().map(|s| s.y_tilde).collect());
        self.z_tilde.push(nodes.iter().map(|s| s.z_tilde).collect());
        self.lambda.push(lambda);
    }
}

fn init_nodes(net: &FinancialNetwork, cfg: &DistConfig) -> (Vec<DistNodeState>, f64) {
    let n = net.n();
    let nodes = (0..n)
        .map(|i| {
            let creditors: Vec<(usize, f64)> = net.creditors(i).iter().map(|&j| (j, net.pi(i, j))).collect();
            let (y, z, q) = match &cfg.start {
                Some(s) => (s.y[i].clamp(0.0, net.pbar()[i]), s.z[i], s.q[i]),
                None => (0.0, 0.0, 0.0),
            };
            DistNodeState {
                id: i,
                e: net.e()[i],
                w: net.w()[i],
                pbar: net.pbar()[i],
                creditor_q: match &cfg.start {
                    Some(s) => creditors.iter().map(|(j, _)| s.q[*j]).collect(),
                    None => vec![0.0; creditors.len()],
                },
                creditors,
                borrowers: net.borrowers(i).to_vec(),
                p: 0.0,
                c: 0.0,
                q,
                y,
                z,
                y_tilde: 0.0,
                z_tilde: 0.0,
                b: false,
            }
        })
        .collect();
    (nodes, cfg.start.as_ref().map_or(0.0, |s| s.lambda))
}

/// `None` budget means the cash price is fixed at `lambda`.
fn run_single_loop(
    net: &FinancialNetwork,
    budget: Option<f64>,
    lambda0: f64,
    cfg: &DistConfig,
    transport: &mut dyn Transport,
) -> Result<(Vec<DistNodeState>, CentralState, DistTrace, bool)> {
    let n = net.n();
    let (mut nodes, start_lambda) = init_nodes(net, cfg);
    let mut central = CentralState {
        lambda: if budget.is_some() { start_lambda } else { lambda0 },
        cash: vec![0.0; n],
        bits: vec![false; n],
        t: 0,
    };
    let mut bus = Bus { nodes: vec![Vec::new(); n], central: Vec::new(), transport, round: 0 };
    let mut inbox: Vec<Vec<Message>> = vec![Vec::new(); n];
    let mut trace = DistTrace::default();
    let mut converged = false;
    while central.t < cfg.max_rounds {
        central.t += 1;
        bus.round = central.t;
        // nodes know λ(t) from the last broadcast (or the fixed price)
        let lambda = central.lambda;
        bus.clear();
        for s in nodes.iter_mut() {
            s.primal_step(lambda, &mut bus);
            bus.send(Message::CashToCentral { from: s.id, cash: s.c });
        }
        std::mem::swap(&mut inbox, &mut bus.nodes);
        for m in &bus.central {
            if let Message::CashToCentral { from, cash } = *m {
                central.cash[from] = cash;
            }
        }
        bus.clear();
        for (s, ib) in nodes.iter_mut().zip(&inbox) {
            s.price_step(cfg.beta, ib, &mut bus);
        }
        if let Some(cap) = budget {
            let total: f64 = central.cash.iter().sum();
            central.lambda = (central.lambda + cfg.alpha * (total - cap)).max(0.0);
            bus.send(Message::LambdaBroadcast { lambda: central.lambda });
        }
        std::mem::swap(&mut inbox, &mut bus.nodes);
        bus.clear();
        for (s, ib) in nodes.iter_mut().zip(&inbox) {
            s.read_prices(ib);
            let bit = s.anchor_step(central.lambda, cfg.tol1, cfg.tol2);
            bus.send(Message::StopBit { from: s.id, bit });
        }
        for m in &bus.central {
            if let Message::StopBit { from, bit } = *m {
                central.bits[from] = bit;
            }
        }
        let done = central.bits.iter().all(|b| *b);
        if central.t % cfg.trace_every == 0 || done || central.t == cfg.max_rounds {
            trace.push(central.t, &nodes, central.lambda);
        }
        if done {
            converged = true;
            break;
        }
    }
    trace.total_rounds = central.t;
    Ok((nodes, central, trace, converged))
}

fn finish(
    net: &FinancialNetwork,
    nodes: &[DistNodeState],
    solver: &str,
    rounds: usize,
    converged: bool,
    budget: f64,
    cost_price: Option<f64>,
) -> Result<(InjectionPlan, ClearingResult)> {
    let c: Vec<f64> = nodes.iter().map(|s| s.c).collect();
    let clearing = clear_proportional(net, &c, ClearingMethod::FictitiousDefault)?;
    let mut meta = SolveMeta::new(solver, rounds);
    meta.converged = converged;
    if !converged {
        meta.notes.push(format!("stopping bits not all set after {rounds} rounds"));
    }
    let p: Vec<f64> = nodes.iter().map(|s| s.p).collect();
    let drift = p.iter().zip(&clearing.p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    meta.notes.push(format!("max gap between iterate and re-cleared payments {drift:.3e}"));
    let total: f64 = c.iter().sum();
    let objective = match cost_price {
        Some(l) => l * total + clearing.weighted_unpaid,
        None => clearing.weighted_unpaid,
    };
    Ok((InjectionPlan { c, budget, objective, meta }, clearing))
}

fn check_common(net: &FinancialNetwork, cfg: &DistConfig) -> Result<()> {
    cfg.validate(net.n())
}

/// Budgeted single-loop schedule, observed through `transport`.
pub fn run_algorithm_a_with(
    net: &FinancialNetwork,
    budget: f64,
    cfg: &DistConfig,
    transport: &mut dyn Transport,
) -> Result<(InjectionPlan, ClearingResult, DistTrace)> {
    check_common(net, cfg)?;
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidParams(format!("budget must be nonnegative, got {budget}")));
    }
    let (nodes, _, trace, converged) = run_single_loop(net, Some(budget), 0.0, cfg, transport)?;
    let (plan, clearing) = finish(net, &nodes, "dist_a", trace.total_rounds, converged, budget, None)?;
    Ok((plan, clearing, trace))
}

pub fn run_algorithm_a(net: &FinancialNetwork, budget: f64, cfg: &DistConfig) -> Result<(InjectionPlan, ClearingResult, DistTrace)> {
    let mut t = CountingTransport::default();
    let (plan, clearing, mut trace) = run_algorithm_a_with(net, budget, cfg, &mut t)?;
    trace.messages = t.messages;
    trace.bytes = t.bytes;
    Ok((plan, clearing, trace))
}

/// Fixed cash price `lambda`; the plan objective is `λ·1ᵀc + W`.
pub fn run_algorithm_a_prime_with(
    net: &FinancialNetwork,
    lambda: f64,
    cfg: &DistConfig,
    transport: &mut dyn Transport,
) -> Result<(InjectionPlan, ClearingResult, DistTrace)> {
    check_common(net, cfg)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParams(format!("lambda must be nonnegative, got {lambda}")));
    }
    let (nodes, _, trace, converged) = run_single_loop(net, None, lambda, cfg, transport)?;
    let total: f64 = nodes.iter().map(|s| s.c).sum();
    let (plan, clearing) = finish(net, &nodes, "dist_a_prime", trace.total_rounds, converged, total, Some(lambda))?;
    Ok((plan, clearing, trace))
}

pub fn run_algorithm_a_prime(net: &FinancialNetwork, lambda: f64, cfg: &DistConfig) -> Result<(InjectionPlan, ClearingResult, DistTrace)> {
    let mut t = CountingTransport::default();
    let (plan, clearing, mut trace) = run_algorithm_a_prime_with(net, lambda, cfg, &mut t)?;
    trace.messages = t.messages;
    trace.bytes = t.bytes;
    Ok((plan, clearing, trace))
}

/// Two-level schedule. The inner dual loop stops when the gradient-mapping
/// norm `‖((q⁺ − q)/β, (λ⁺ − λ)/α)‖₂` falls below `min(tol1, tol2)/10`;
/// the outer loop stops when the anchors move less than `tol1`, `tol2`.
/// `max_rounds` bounds the total number of inner iterations.
pub fn run_algorithm_p(net: &FinancialNetwork, budget: f64, cfg: &DistConfig) -> Result<(InjectionPlan, ClearingResult, DistTrace)> {
    check_common(net, cfg)?;
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidParams(format!("budget must be nonnegative, got {budget}")));
    }
    let n = net.n();
    let (mut nodes, mut lambda) = init_nodes(net, cfg);
    let mut transport = CountingTransport::default();
    let mut bus = Bus { nodes: vec![Vec::new(); n], central: Vec::new(), transport: &mut transport, round: 0 };
    let mut inbox: Vec<Vec<Message>> = vec![Vec::new(); n];
    let mut trace = DistTrace::default();
    let inner_tol = cfg.tol1.min(cfg.tol2) / 10.0;
    let mut total = 0usize;
    let mut converged = false;
    let mut outer = 0usize;
    'outer: loop {
        outer += 1;
        let mut inner = 0usize;
        let mut residuals = Vec::new();
        loop {
            if total >= cfg.max_rounds {
                break 'outer;
            }
            total += 1;
            inner += 1;
            bus.round = total;
            bus.clear();
            for s in nodes.iter_mut() {
                s.primal_step(lambda, &mut bus);
                bus.send(Message::CashToCentral { from: s.id, cash: s.c });
            }
            std::mem::swap(&mut inbox, &mut bus.nodes);
            let cash: f64 = bus
                .central
                .iter()
                .filter_map(|m| match *m {
                    Message::CashToCentral { cash, .. } => Some(cash),
                    _ => None,
                })
                .sum();
            bus.clear();
            let before: Vec<f64> = nodes.iter().map(|s| s.q).collect();
            for (s, ib) in nodes.iter_mut().zip(&inbox) {
                s.price_step(cfg.beta, ib, &mut bus);
            }
            let next_lambda = (lambda + cfg.alpha * (cash - budget)).max(0.0);
            bus.send(Message::LambdaBroadcast { lambda: next_lambda });
            let mut res = ((next_lambda - lambda) / cfg.alpha).powi(2);
            for (s, q0) in nodes.iter().zip(&before) {
                res += ((s.q - q0) / cfg.beta).powi(2);
            }
            let res = res.sqrt();
            lambda = next_lambda;
            std::mem::swap(&mut inbox, &mut bus.nodes);
            for (s, ib) in nodes.iter_mut().zip(&inbox) {
                s.read_prices(ib);
            }
            if residuals.len() < 10_000 {
                residuals.push(res);
            }
            if res < inner_tol {
                break;
            }
        }
        // the anchors jump to the inner maximizer
        bus.clear();
        for s in nodes.iter_mut() {
            s.primal_step(lambda, &mut bus);
        }
        trace.inner_iterations.push(inner);
        if trace.inner_residuals.len() < 100 && residuals.len() > trace.inner_residuals.len() {
            trace.inner_residuals = residuals;
        }
        let mut all = true;
        for s in nodes.iter_mut() {
            s.b = (s.p - s.y).abs() < cfg.tol1 && (s.c - s.z).abs() < cfg.tol2;
            all &= s.b;
            s.y_tilde = s.p;
            s.z_tilde = s.c;
            s.y = s.p;
            s.z = s.c;
            bus.send(Message::StopBit { from: s.id, bit: s.b });
        }
        if outer % cfg.trace_every == 0 || all {
            trace.push(total, &nodes, lambda);
        }
        if all {
            converged = true;
            break;
        }
    }
    if !converged {
        trace.push(total, &nodes, lambda);
    }
    trace.total_rounds = total;
    trace.messages = transport.messages;
    trace.bytes = transport.bytes;
    let (plan, clearing) = finish(net, &nodes, "dist_p", total, converged, budget, None)?;
    Ok((plan, clearing, trace))
}
