from django.core.management.base import BaseCommand

from forecasting.synthetic import traveling_wave, write_snapshot


class Command(BaseCommand):
    help = 'Write a synthetic traveling-wave cohort (cases, cities, GDP CSVs and a TOML config)'

    def add_arguments(self, parser):
        parser.add_argument('--out', type=str, required=True, help='Directory for the snapshot files')
        parser.add_argument('--cities', type=int, default=20, help='Number of cities on the line')
        parser.add_argument('--train-weeks', type=int, default=150)
        parser.add_argument('--test-weeks', type=int, default=30)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--noise', type=float, default=0.1, help='Multiplicative noise level')
        parser.add_argument('--disease', type=str, default='synthetic')
        parser.add_argument(
            '--spike',
            action='append',
            default=[],
            help='City id that gets an anomalous hold-out week; repeat for several',
        )

    def handle(self, *args, **options):
        self.stdout.write('Creating synthetic cohort...')

        cohort = traveling_wave(
            n_cities=options['cities'],
            n_train=options['train_weeks'],
            n_test=options['test_weeks'],
            seed=options['seed'],
            noise=options['noise'],
            spike_cities=options['spike'],
            disease=options['disease'],
        )
        config_path = write_snapshot(cohort, options['out'])

        self.stdout.write(f'Cities: {len(cohort.cities)}')
        self.stdout.write(f'Train weeks: {cohort.train_range[0]}..{cohort.train_range[1]}')
        self.stdout.write(f'Test weeks: {cohort.test_range[0]}..{cohort.test_range[1]}')
        if options['spike']:
            self.stdout.write(f'Anomalous cities: {", ".join(sorted(options["spike"]))}')
        self.stdout.write(
            self.style.SUCCESS(f'Synthetic cohort written; run it with: python manage.py wavecast run --config {config_path}')
        )
