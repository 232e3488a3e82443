use crate::engine::{NodeProgram, Protocol, Status, Symbol};

use super::echo::EchoCore;
use super::height::HeightCore;
use super::signal::ALPHABET as CONTROL;

/// Makes a locally terminating protocol halt everywhere in one round.
///
/// Every symbol becomes a pair: the inner protocol's symbol and a control
/// symbol. The inner protocol runs untouched on the first component. On the
/// second, an echo runs that a node may join only once its inner protocol
/// has halted; a `1` arriving earlier is answered after that. When the
/// leader's echo completes, every inner protocol has halted, and the leader
/// starts a height search, whose simultaneous halt ends the run.
#[derive(Clone, Debug)]
pub struct SyncWrap<P> {
    inner: P,
    name: String,
}

pub fn sync_wrap<P: Protocol>(inner: P) -> SyncWrap<P> {
    let name = format!("sync({})", inner.name());
    SyncWrap { inner, name }
}

impl<P: Protocol> Protocol for SyncWrap<P> {
    type Node = Synced<P::Node>;

    fn name(&self) -> &str {
        &self.name
    }

    fn alphabet_size(&self) -> u16 {
        self.inner.alphabet_size() * CONTROL
    }

    fn spawn(&self, degree: usize, is_leader: bool) -> Self::Node {
        Synced::new(self.inner.spawn(degree, is_leader), degree, is_leader)
    }
}

#[derive(Clone, Debug)]
pub struct Synced<N> {
    inner: N,
    inner_halted: Option<u64>,
    echo: EchoCore,
    height: Option<HeightCore>,
    halted: bool,
    inner_in: Vec<Symbol>,
    inner_out: Vec<Symbol>,
    control_in: Vec<Symbol>,
    control_out: Vec<Symbol>,
}

impl<N: NodeProgram> Synced<N> {
    pub fn new(inner: N, degree: usize, leader: bool) -> Self {
        Synced {
            inner,
            inner_halted: None,
            echo: EchoCore::new(degree, leader),
            height: None,
            halted: false,
            inner_in: vec![Symbol::EMPTY; degree],
            inner_out: vec![Symbol::EMPTY; degree],
            control_in: vec![Symbol::EMPTY; degree],
            control_out: vec![Symbol::EMPTY; degree],
        }
    }

    pub fn inner(&self) -> &N {
        &self.inner
    }

    /// Round in which the inner protocol halted locally.
    pub fn inner_halted_at(&self) -> Option<u64> {
        self.inner_halted
    }

    /// Height learned by the closing height search.
    pub fn d(&self) -> Option<u64> {
        self.height.as_ref().and_then(HeightCore::d)
    }
}

impl<N: NodeProgram> NodeProgram for Synced<N> {
    type Output = N::Output;

    fn step(&mut self, round: u64, inbox: &[Symbol], outbox: &mut [Symbol]) -> Status {
        if self.halted {
            return Status::Halted;
        }
        for (k, &s) in inbox.iter().enumerate() {
            let (inner, control) = s.split(CONTROL);
            self.inner_in[k] = inner;
            self.control_in[k] = control;
        }
        self.inner_out.fill(Symbol::EMPTY);
        self.control_out.fill(Symbol::EMPTY);

        if self.inner_halted.is_none()
            && self.inner.step(round, &self.inner_in, &mut self.inner_out) == Status::Halted
        {
            self.inner_halted = Some(round);
        }

        match &mut self.height {
            Some(height) => {
                if height.step(round, &self.control_in, &mut self.control_out) == Status::Halted {
                    self.halted = true;
                }
            }
            None => {
                let leader = self.echo.leader;
                self.echo
                    .step(round, &self.control_in, &mut self.control_out, self.inner_halted.is_some());
                if leader && self.echo.completed == Some(round) {
                    let mut height = HeightCore::new(self.echo.degree(), true, true);
                    if height.step(round, &self.control_in, &mut self.control_out) == Status::Halted {
                        self.halted = true;
                    }
                    self.height = Some(height);
                } else if !leader && self.echo.sent_up == Some(round) {
                    self.height = Some(HeightCore::new(self.echo.degree(), false, true));
                }
            }
        }

        for (k, out) in outbox.iter_mut().enumerate() {
            *out = Symbol::pair(self.inner_out[k], self.control_out[k], CONTROL);
        }
        if self.halted {
            Status::Halted
        } else {
            Status::Running
        }
    }

    fn output(&self) -> N::Output {
        self.inner.output()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{audit_strong_termination, run_until_halt, RunOptions};
    use crate::net::{generate, petersen, GraphKind};
    use crate::oracle;
    use crate::protocols::{echo, height_search};

    #[test]
    fn wrapped_echo_halts_together() {
        for kind in GraphKind::ALL {
            for n in [1, 2, 3, 7, 25] {
                if kind == GraphKind::Cycle && n < 3 {
                    continue;
                }
                let extra = if kind == GraphKind::RandomConnected { n / 3 } else { 0 };
                let cfg = generate(kind, n, extra, 9).unwrap();
                let d = oracle::height(&cfg) as u64;
                let mut run = run_until_halt(&cfg, &sync_wrap(echo()), &RunOptions::for_config(&cfg)).unwrap();
                assert!(audit_strong_termination(&mut run, 2 * d + 8), "{kind} {n}");
            }
        }
    }

    #[test]
    fn outputs_pass_through() {
        let cfg = petersen();
        let plain = run_until_halt(&cfg, &echo(), &RunOptions::for_config(&cfg)).unwrap();
        let wrapped = run_until_halt(&cfg, &sync_wrap(echo()), &RunOptions::for_config(&cfg)).unwrap();
        assert_eq!(plain.outputs(), wrapped.outputs());
        assert!(wrapped.execution_time() > plain.execution_time());
    }

    #[test]
    fn simultaneous_inner_only_delays() {
        let cfg = generate(GraphKind::RandomConnected, 15, 6, 2).unwrap();
        let d = oracle::height(&cfg) as u64;
        let plain = run_until_halt(&cfg, &height_search(), &RunOptions::for_config(&cfg)).unwrap();
        let wrapped = run_until_halt(&cfg, &sync_wrap(height_search()), &RunOptions::for_config(&cfg)).unwrap();
        assert_eq!(plain.outputs(), wrapped.outputs());
        // Echo from the common halt round, then a full height search.
        let t = plain.execution_time();
        assert_eq!(wrapped.execution_time(), t + (2 * d + 1) + (3 * d + 2));
    }

    #[test]
    fn first_components_replay_inner() {
        let cfg = generate(GraphKind::RandomTree, 12, 0, 5).unwrap();
        let plain = run_until_halt(&cfg, &echo(), &RunOptions::for_config(&cfg).traced()).unwrap();
        let wrapped = run_until_halt(&cfg, &sync_wrap(echo()), &RunOptions::for_config(&cfg).traced()).unwrap();
        let project = |events: &[crate::engine::TraceEvent], paired: bool| -> Vec<String> {
            use crate::engine::TraceEvent::*;
            events
                .iter()
                .filter_map(|e| match e {
                    Send { round, node, port, symbol } => {
                        let inner = if paired { symbol.split(CONTROL).0 } else { *symbol };
                        (!inner.is_empty()).then(|| format!("{round} {node} {port} {inner}"))
                    }
                    _ => None,
                })
                .collect()
        };
        let direct: Vec<String> = project(&plain.trace().unwrap().events, false);
        let replayed = project(&wrapped.trace().unwrap().events, true);
        assert_eq!(direct, replayed);
    }
}
