"""
Example usage of the fair pain-status pipeline

This script demonstrates:
1. Synthetic cohort generation and dataset bias
2. Bundle ingestion
3. Feature extraction
4. Bias mitigation
5. A small experiment grid
"""

from pathlib import Path

from src.cohort import CohortIngestionPipeline, EncodingPlan, SynthConfig, synthesize_cohort, write_bundle
from src.experiments import ExperimentSpec, run_experiment
from src.features import build_feature_matrix
from src.fairness import dataset_bias
from src.mitigation import reweigh

BUNDLE = Path("data/example_bundle")


def example_synthetic_cohort():
    """Example 1: Synthetic cohort with a biased attribute"""
    print("\n" + "="*60)
    print("EXAMPLE 1: Synthetic Cohort")
    print("="*60)

    cohort = synthesize_cohort(SynthConfig(n_participants=60, bias={"gender": 0.4}, seed=7))
    spd, di = dataset_bias(cohort.labels(), cohort.group("gender"))
    print(f"\n✓ Participants: {len(cohort.profiles)}, instances: {len(cohort)}")
    print(f"✓ Label SPD (gender): {spd:+.3f}, DI: {di:.3f}")

    write_bundle(cohort, BUNDLE)
    print(f"✓ Bundle written to {BUNDLE}")
    return cohort


def example_ingestion():
    """Example 2: Ingest the bundle"""
    print("\n" + "="*60)
    print("EXAMPLE 2: Bundle Ingestion")
    print("="*60)

    cohort, results = CohortIngestionPipeline(EncodingPlan()).run(BUNDLE)
    print(f"\n✓ Included: {results['participants_included']}/{results['participants_read']}")
    print(f"✓ Instances: {results['instances_built']}")

    if results['exclusions']:
        print(f"\n⚠ Exclusions: {len(results['exclusions'])}")
        for pid, reason in list(results['exclusions'].items())[:3]:
            print(f"  - {pid}: {reason}")
    return cohort


def example_features(cohort):
    """Example 3: Feature matrix with a deviance transform"""
    print("\n" + "="*60)
    print("EXAMPLE 3: Feature Extraction")
    print("="*60)

    plan = EncodingPlan(mode="features", domains=("statistical",), channels=("hr",),
                        variants=("mathematical",))
    matrix = build_feature_matrix(cohort, plan, workers=4)
    print(f"\n✓ Feature matrix: {matrix.shape[0]} x {matrix.shape[1]}")
    print(f"✓ First columns: {', '.join(matrix.columns[:3])}")


def example_reweighing(cohort):
    """Example 4: Reweighing removes label bias"""
    print("\n" + "="*60)
    print("EXAMPLE 4: Reweighing")
    print("="*60)

    labels, group = cohort.labels(), cohort.group("gender")
    table, weights = reweigh(labels, group)
    spd, _ = dataset_bias(labels, group, weights)
    print(f"\n✓ Weights per (group, label): {table.weights}")
    print(f"✓ Weighted label SPD: {spd:+.2e}")


def example_experiment():
    """Example 5: Baseline experiment grid"""
    print("\n" + "="*60)
    print("EXAMPLE 5: Experiment Grid")
    print("="*60)

    spec = ExperimentSpec(
        seed=7,
        bundle=str(BUNDLE),
        models=("logistic", "naive_bayes", "decision_tree"),
        mitigations=("reweighing", "dir", "roc"),
        repetitions=2,
        out_dir="results/example",
    )
    results = run_experiment(spec)
    print(results.summary())


def main():
    """Run all examples"""
    print("\n" + "="*60)
    print("FAIR PAIN-STATUS PIPELINE - EXAMPLES")
    print("="*60)

    try:
        example_synthetic_cohort()
        cohort = example_ingestion()
        example_features(cohort)
        example_reweighing(cohort)
        example_experiment()

        print("\n" + "="*60)
        print("✓ ALL EXAMPLES COMPLETED SUCCESSFULLY")
        print("="*60 + "\n")

    except Exception as e:
        print(f"\n✗ Error running examples: {str(e)}")
        import traceback
        traceback.print_exc()


if __name__ == "__main__":
    main()
