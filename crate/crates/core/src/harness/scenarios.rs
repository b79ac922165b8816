use std::f64::consts::SQRT_2;

use crate::dynamics::{
    kaleidoscope, CouplingSpec, GameDefinition, HiddenBehaviorSpec, LorenzForcing, PhiModel, Policy, XiBlock,
};
use crate::error::{Error, Result};
use crate::perception::FinishingPredicate;
use crate::verbalization::{CellPartition, Verbalizer};

use super::config::ScenarioConfig;

/// Chaotic hidden behavior of KR-1: a slowed Lorenz flow on the human's `ε`,
/// nudged by the pointer.
pub fn lorenz_hidden() -> HiddenBehaviorSpec {
    HiddenBehaviorSpec::LorenzLike {
        target: 0,
        sigma: 10.0,
        rho: 28.0,
        beta: 8.0 / 3.0,
        time_scale: 0.2,
        scales: vec![0.05, 0.04],
        offsets: vec![],
        forcing: Some(LorenzForcing {
            phi_index: kaleidoscope::POINTER,
            gain: 1.0,
        }),
    }
}

/// Hidden behavior of KR-1R: the co-player's pure control reappears in the
/// human's `ε` one set later.
pub fn mirror_hidden(set_steps: usize) -> HiddenBehaviorSpec {
    HiddenBehaviorSpec::LaggedMirror {
        source: 1,
        target: 0,
        lag_sets: 1,
        set_steps,
        gain: 1.0,
    }
}

/// Two drums, a pointer steered by the human (player 0) and a clock; the
/// co-player (player 1) follows the drums. Additive couplings, singleton
/// coalitions.
pub fn kaleidoscope_game(hidden: HiddenBehaviorSpec) -> GameDefinition {
    GameDefinition {
        state_dim: kaleidoscope::STATE_DIM,
        intention_dim: 2,
        n_players: 2,
        control_dim: 2,
        phi_rhs: PhiModel::Kaleidoscope {
            drum_frequencies: [0.7, 0.7 * SQRT_2],
            pointer_decay: 0.5,
            pointer_gain: 1.0,
        },
        xi_rhs: vec![XiBlock::Leaky {
            rate: 0.5,
            player: 0,
            dim: 2,
        }],
        couplings: vec![CouplingSpec::additive(2); 2],
        hidden,
        coalitions: GameDefinition::singleton_coalitions(2),
        xi_feedback: vec![],
        phi0: vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        xi0: vec![],
    }
}

/// Everything a run needs, built from a validated config.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub game: GameDefinition,
    pub policy: Policy,
    pub verbalizer: Verbalizer,
    pub predicate: FinishingPredicate,
    pub max_duration: f64,
}

impl Scenario {
    pub fn resolve(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let set_steps = config.set_steps();
        let game = match config.scenario.as_str() {
            "KR-1" => kaleidoscope_game(config.hidden.clone().unwrap_or_else(lorenz_hidden)),
            "KR-1R" => kaleidoscope_game(config.hidden.clone().unwrap_or_else(|| mirror_hidden(set_steps))),
            _ => {
                let mut g = config.game.clone().expect("validated");
                if let Some(h) = &config.hidden {
                    g.hidden = h.clone();
                }
                g
            }
        };
        game.validate()?;
        let policy = Policy::from_id(&config.policy.id, game.n_players, game.control_dim, config.policy.gain)?;
        policy.validate(&game)?;

        let part = &config.partition;
        let eps_width: usize = game.eps_dims().iter().sum();
        let control_width = game.n_players * game.control_dim;
        let mut omega_partition = CellPartition::folded_uniform(
            eps_width,
            &part.eps_axes,
            part.cell_width,
            part.extent,
            config.alphabet,
        )
        .map_err(|e| rename_field(e, "partition.eps_axes"))?;
        omega_partition.hysteresis = part.hysteresis;
        let mut control_partition = CellPartition::folded_uniform(
            control_width,
            &part.control_axes,
            part.cell_width,
            part.extent,
            config.alphabet,
        )
        .map_err(|e| rename_field(e, "partition.control_axes"))?;
        control_partition.hysteresis = part.hysteresis;
        let verbalizer = Verbalizer::new(omega_partition, control_partition)?;

        let predicate = config.predicate.clone().unwrap_or(FinishingPredicate::Clock {
            index: game.state_dim - 1,
            period: config.set_period,
        });
        predicate.validate(game.state_dim)?;
        if matches!(game.phi_rhs, PhiModel::Linear { .. }) && config.predicate.is_none() {
            return Err(Error::validation(
                "predicate",
                "the default clock predicate needs the kaleidoscope state",
            ));
        }

        let mut resolved = config.clone();
        resolved.hidden = Some(game.hidden.clone());
        resolved.predicate = Some(predicate.clone());
        resolved.max_set_duration = Some(config.max_duration());
        Ok(Scenario {
            config: resolved,
            game,
            policy,
            verbalizer,
            predicate,
            max_duration: config.max_duration(),
        })
    }
}

fn rename_field(e: Error, field: &str) -> Error {
    match e {
        Error::Validation { message, .. } => Error::validation(field, message),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_scenarios_resolve() {
        for id in ["KR-1", "KR-1R"] {
            let s = Scenario::resolve(&ScenarioConfig::new(id, 1)).unwrap();
            assert_eq!(s.verbalizer.alphabet_size(), 4);
            assert_eq!(s.game.state_dim, 7);
        }
        let r = Scenario::resolve(&ScenarioConfig::new("KR-1R", 1)).unwrap();
        assert_eq!(r.game.hidden.kind(), "lagged-mirror");
    }

    #[test]
    fn resolved_config_reloads_identically() {
        let s = Scenario::resolve(&ScenarioConfig::new("KR-1", 3)).unwrap();
        let again = Scenario::resolve(&s.config).unwrap();
        assert_eq!(again.config, s.config);
        assert_eq!(again.game, s.game);
    }

    #[test]
    fn bad_partition_axis_names_field() {
        let mut c = ScenarioConfig::new("KR-1", 1);
        c.partition.eps_axes = vec![9];
        match Scenario::resolve(&c) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "partition.eps_axes"),
            other => panic!("{other:?}"),
        }
    }
}
