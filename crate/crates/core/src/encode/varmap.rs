use crate::instance::{AgentId, VertexId};
use crate::mdd::Mdd;
use crate::sat::Var;

/// What a SAT variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarMeaning {
    /// Agent is at `vertex` at timestep `t`.
    At {
        agent: AgentId,
        vertex: VertexId,
        t: usize,
    },
    /// Agent traverses `from -> to` starting at `t`; `from == to` is a wait.
    Move {
        agent: AgentId,
        from: VertexId,
        to: VertexId,
        t: usize,
    },
    /// Agent has not yet settled at its goal at timestep `t`.
    Late { agent: AgentId, t: usize },
    /// Helper variable of an at-most-one or cardinality encoding.
    Aux,
}

#[derive(Debug, Clone)]
struct AgentVars {
    layers: Vec<Vec<VertexId>>,
    layer_base: Vec<u32>,
    arcs: Vec<Vec<(VertexId, VertexId)>>,
    arc_base: Vec<u32>,
    late_from: usize,
    late_base: u32,
    late_count: usize,
}

/// Bijection between structural SAT variables and their meanings.
///
/// Numbering is time-major so that search with lowest-index tie-breaking
/// extends all agents' plans together: for each `t`, every agent's vertex
/// variables of layer `t`, then every agent's arc variables leaving layer `t`.
/// `Late` variables come after all timesteps, auxiliary variables last.
#[derive(Debug, Clone)]
pub struct VarMap {
    agents: Vec<AgentVars>,
    meanings: Vec<VarMeaning>,
    horizon: usize,
}

impl VarMap {
    /// All MDDs must share one horizon.
    pub fn new(mdds: &[Mdd]) -> Self {
        let horizon = mdds.first().map_or(0, Mdd::horizon);
        for mdd in mdds {
            assert_eq!(
                mdd.horizon(),
                horizon,
                "MDDs must be padded to a common horizon"
            );
        }
        let mut meanings = Vec::new();
        let mut agents: Vec<AgentVars> = mdds
            .iter()
            .map(|mdd| AgentVars {
                layers: mdd.layers.clone(),
                layer_base: Vec::with_capacity(horizon + 1),
                arcs: mdd.arcs.clone(),
                arc_base: Vec::with_capacity(horizon),
                late_from: mdd.shortest,
                late_base: 0,
                late_count: mdd.depth - mdd.shortest,
            })
            .collect();
        for t in 0..=horizon {
            for (agent, vars) in agents.iter_mut().enumerate() {
                vars.layer_base.push(meanings.len() as u32);
                for &vertex in &vars.layers[t] {
                    meanings.push(VarMeaning::At { agent, vertex, t });
                }
            }
            if t < horizon {
                for (agent, vars) in agents.iter_mut().enumerate() {
                    vars.arc_base.push(meanings.len() as u32);
                    for &(from, to) in &vars.arcs[t] {
                        meanings.push(VarMeaning::Move { agent, from, to, t });
                    }
                }
            }
        }
        for (agent, vars) in agents.iter_mut().enumerate() {
            vars.late_base = meanings.len() as u32;
            for t in vars.late_from..vars.late_from + vars.late_count {
                meanings.push(VarMeaning::Late { agent, t });
            }
        }
        VarMap {
            agents,
            meanings,
            horizon,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    /// Number of non-auxiliary variables; they occupy `0..structural_vars()`.
    pub fn structural_vars(&self) -> usize {
        self.meanings.len()
    }

    pub fn meaning(&self, var: Var) -> VarMeaning {
        self.meanings
            .get(var.index())
            .copied()
            .unwrap_or(VarMeaning::Aux)
    }

    pub fn layer(&self, agent: AgentId, t: usize) -> &[VertexId] {
        &self.agents[agent].layers[t]
    }

    pub fn arcs(&self, agent: AgentId, t: usize) -> &[(VertexId, VertexId)] {
        &self.agents[agent].arcs[t]
    }

    /// Vertex variables of one layer, in vertex order.
    pub fn layer_vars(
        &self,
        agent: AgentId,
        t: usize,
    ) -> impl Iterator<Item = (VertexId, Var)> + '_ {
        let a = &self.agents[agent];
        let base = a.layer_base[t];
        a.layers[t]
            .iter()
            .enumerate()
            .map(move |(i, &v)| (v, Var(base + i as u32)))
    }

    pub fn arc_vars(
        &self,
        agent: AgentId,
        t: usize,
    ) -> impl Iterator<Item = (VertexId, VertexId, Var)> + '_ {
        let a = &self.agents[agent];
        let base = a.arc_base[t];
        a.arcs[t]
            .iter()
            .enumerate()
            .map(move |(i, &(u, v))| (u, v, Var(base + i as u32)))
    }

    pub fn at(&self, agent: AgentId, vertex: VertexId, t: usize) -> Option<Var> {
        let a = self.agents.get(agent)?;
        let idx = a.layers.get(t)?.binary_search(&vertex).ok()?;
        Some(Var(a.layer_base[t] + idx as u32))
    }

    pub fn arc(&self, agent: AgentId, t: usize, from: VertexId, to: VertexId) -> Option<Var> {
        let a = self.agents.get(agent)?;
        let idx = a.arcs.get(t)?.binary_search(&(from, to)).ok()?;
        Some(Var(a.arc_base[t] + idx as u32))
    }

    pub fn late(&self, agent: AgentId, t: usize) -> Option<Var> {
        let a = self.agents.get(agent)?;
        (t >= a.late_from && t < a.late_from + a.late_count)
            .then(|| Var(a.late_base + (t - a.late_from) as u32))
    }

    pub fn late_vars(&self, agent: AgentId) -> impl Iterator<Item = Var> + '_ {
        let a = &self.agents[agent];
        (0..a.late_count as u32).map(move |i| Var(a.late_base + i))
    }

    pub fn late_range(&self, agent: AgentId) -> std::ops::Range<usize> {
        let a = &self.agents[agent];
        a.late_from..a.late_from + a.late_count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Graph, MapfInstance};
    use crate::mdd::{all_distances, build_all};

    #[test]
    fn numbering_is_time_major_and_bijective() {
        let inst = MapfInstance::new(Graph::grid(3, 2), vec![0, 5], vec![2, 3]);
        let tables = all_distances(&inst).unwrap();
        let mdds = build_all(&inst, &tables, 1);
        let vm = VarMap::new(&mdds);
        let mut last_t = 0;
        for i in 0..vm.structural_vars() {
            let var = Var(i as u32);
            let back = match vm.meaning(var) {
                VarMeaning::At { agent, vertex, t } => {
                    assert!(t >= last_t);
                    last_t = t;
                    vm.at(agent, vertex, t)
                }
                VarMeaning::Move { agent, from, to, t } => {
                    assert!(t >= last_t);
                    vm.arc(agent, t, from, to)
                }
                VarMeaning::Late { agent, t } => vm.late(agent, t),
                VarMeaning::Aux => None,
            };
            assert_eq!(back, Some(var));
        }
        assert_eq!(
            vm.meaning(Var(vm.structural_vars() as u32)),
            VarMeaning::Aux
        );
        assert_eq!(vm.at(0, 0, 0), Some(Var(0)));
        assert_eq!(vm.at(0, 5, 0), None);
        assert_eq!(vm.late_range(0), 2..3);
    }
}
