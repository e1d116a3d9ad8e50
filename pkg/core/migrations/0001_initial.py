from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=32)),
                ('seed', models.BigIntegerField(blank=True, null=True)),
                ('parameters', models.JSONField(default=dict)),
                ('success', models.BooleanField(default=False)),
                ('residual', models.IntegerField(blank=True, null=True)),
                ('seconds', models.FloatField(blank=True, null=True)),
                ('summary', models.JSONField(default=dict)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ('-created_at',),
                'indexes': [models.Index(fields=['command', 'seed'], name='core_run_command_seed_idx')],
            },
        ),
    ]
