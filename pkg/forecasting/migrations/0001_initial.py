from django.db import migrations, models
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('disease', models.CharField(max_length=100)),
                ('config_path', models.CharField(blank=True, max_length=500)),
                ('seed', models.BigIntegerField()),
                ('jobs', models.PositiveIntegerField(default=1)),
                ('output_dir', models.CharField(max_length=500)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('processing', 'Processing'), ('completed', 'Completed'), ('failed', 'Failed'), ('partial', 'Partial')], default='pending', max_length=15)),
                ('n_cities', models.PositiveIntegerField(default=0)),
                ('n_reports', models.PositiveIntegerField(default=0)),
                ('failed_cities', models.JSONField(blank=True, default=list)),
                ('error_details', models.JSONField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
    ]
